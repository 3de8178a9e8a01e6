#ifndef LATENTDAG_DATA_HPP
#define LATENTDAG_DATA_HPP

#include <latentdag/dag.hpp>

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace latentdag {

enum class VariableKind { continuous, ordinal };

struct ColumnInfo {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    int levels = 0;  // ordinal only; codes are 0 .. levels-1
    NodeRole role = NodeRole::predictor;
};

/// Samples x variables table. Immutable once built; ordinal columns hold integer level codes.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::vector<ColumnInfo> columns, Eigen::MatrixXd values);

    /// All columns continuous predictors.
    static DataMatrix continuous(std::vector<std::string> names, Eigen::MatrixXd values);

    Eigen::Index rows() const { return m_values.rows(); }
    Eigen::Index cols() const { return m_values.cols(); }
    const Eigen::MatrixXd& values() const { return m_values; }
    auto column(std::size_t j) const { return m_values.col(static_cast<Eigen::Index>(j)); }
    auto column(std::string_view name) const { return m_values.col(static_cast<Eigen::Index>(index(name))); }

    const std::vector<ColumnInfo>& columns() const { return m_columns; }
    const ColumnInfo& info(std::size_t j) const { return m_columns.at(j); }
    std::vector<std::string> names() const;
    std::vector<NodeRole> roles() const;

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws UnknownNode.
    std::size_t index(std::string_view name) const;

    /// Copy with roles replaced; names absent from `roles` keep their role.
    DataMatrix with_roles(const std::unordered_map<std::string, NodeRole>& roles) const;
    /// Copy restricted to the named columns, in the given order.
    DataMatrix select(const std::vector<std::string>& names) const;
    DataMatrix without(const std::vector<std::string>& names) const;
    /// Copy keeping the given rows (duplicates allowed).
    DataMatrix take_rows(const std::vector<Eigen::Index>& rows) const;

    /// Empty graph over these columns with matching roles.
    Dag empty_dag() const;

private:
    void validate();

    std::vector<ColumnInfo> m_columns;
    Eigen::MatrixXd m_values;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Residuals mirroring the modeled columns of a DataMatrix.
class ResidualMatrix {
public:
    ResidualMatrix() = default;
    ResidualMatrix(std::vector<std::string> names, Eigen::MatrixXd values, std::vector<NodeRole> roles = {});

    Eigen::Index rows() const { return m_values.rows(); }
    Eigen::Index cols() const { return m_values.cols(); }
    const Eigen::MatrixXd& values() const { return m_values; }
    const std::vector<std::string>& names() const { return m_names; }
    const std::vector<NodeRole>& roles() const { return m_roles; }

    ResidualMatrix select(const std::vector<std::string>& names) const;
    ResidualMatrix without_role(NodeRole role) const;

private:
    std::vector<std::string> m_names;
    Eigen::MatrixXd m_values;
    std::vector<NodeRole> m_roles;
};

/// Column-standardizes (mean 0, sample sd 1). Throws DegenerateInput on a zero-variance column.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& values, const std::vector<std::string>& names = {});

}  // namespace latentdag

#endif  // LATENTDAG_DATA_HPP
