#include <latentdag/data.hpp>
#include <latentdag/error.hpp>

#include <cmath>
#include <unordered_set>

namespace latentdag {

DataMatrix::DataMatrix(std::vector<ColumnInfo> columns, Eigen::MatrixXd values)
    : m_columns(std::move(columns)), m_values(std::move(values)) {
    validate();
}

DataMatrix DataMatrix::continuous(std::vector<std::string> names, Eigen::MatrixXd values) {
    std::vector<ColumnInfo> cols;
    cols.reserve(names.size());
    for (auto& n : names) cols.push_back({std::move(n), VariableKind::continuous, 0, NodeRole::predictor});
    return DataMatrix(std::move(cols), std::move(values));
}

void DataMatrix::validate() {
    if (static_cast<Eigen::Index>(m_columns.size()) != m_values.cols())
        throw Error(ErrorKind::shape_mismatch, "column metadata does not match matrix width");
    m_index.clear();
    for (std::size_t j = 0; j < m_columns.size(); ++j) {
        const auto& c = m_columns[j];
        if (c.name.empty()) throw Error(ErrorKind::invalid_config, "empty column name");
        if (!m_index.emplace(c.name, j).second)
            throw Error(ErrorKind::name_collision, "duplicate column '" + c.name + "'");
        if (c.kind == VariableKind::ordinal && c.levels < 2)
            throw Error(ErrorKind::invalid_config, "ordinal column '" + c.name + "' needs at least 2 levels");
        const auto col = m_values.col(static_cast<Eigen::Index>(j));
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            const double v = col(i);
            if (!std::isfinite(v))
                throw Error(ErrorKind::parse_error,
                            "missing or non-finite value in column '" + c.name + "' row " + std::to_string(i + 1));
            if (c.kind == VariableKind::ordinal && (v != std::floor(v) || v < 0 || v >= c.levels))
                throw Error(ErrorKind::parse_error,
                            "invalid level code in column '" + c.name + "' row " + std::to_string(i + 1));
        }
    }
}

std::vector<std::string> DataMatrix::names() const {
    std::vector<std::string> out;
    out.reserve(m_columns.size());
    for (const auto& c : m_columns) out.push_back(c.name);
    return out;
}

std::vector<NodeRole> DataMatrix::roles() const {
    std::vector<NodeRole> out;
    out.reserve(m_columns.size());
    for (const auto& c : m_columns) out.push_back(c.role);
    return out;
}

std::optional<std::size_t> DataMatrix::find(std::string_view name) const {
    auto it = m_index.find(std::string(name));
    if (it == m_index.end()) return std::nullopt;
    return it->second;
}

std::size_t DataMatrix::index(std::string_view name) const {
    auto j = find(name);
    if (!j) throw Error(ErrorKind::unknown_node, "unknown column '" + std::string(name) + "'");
    return *j;
}

DataMatrix DataMatrix::with_roles(const std::unordered_map<std::string, NodeRole>& roles) const {
    auto cols = m_columns;
    for (const auto& [name, role] : roles) cols[index(name)].role = role;
    return DataMatrix(std::move(cols), m_values);
}

DataMatrix DataMatrix::select(const std::vector<std::string>& names) const {
    std::vector<ColumnInfo> cols;
    Eigen::MatrixXd values(rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) {
        const std::size_t j = index(names[k]);
        cols.push_back(m_columns[j]);
        values.col(static_cast<Eigen::Index>(k)) = m_values.col(static_cast<Eigen::Index>(j));
    }
    return DataMatrix(std::move(cols), std::move(values));
}

DataMatrix DataMatrix::without(const std::vector<std::string>& names) const {
    std::unordered_set<std::string> drop(names.begin(), names.end());
    std::vector<std::string> keep;
    for (const auto& c : m_columns) {
        if (!drop.count(c.name)) keep.push_back(c.name);
    }
    return select(keep);
}

DataMatrix DataMatrix::take_rows(const std::vector<Eigen::Index>& rows) const {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), cols());
    for (std::size_t r = 0; r < rows.size(); ++r) values.row(static_cast<Eigen::Index>(r)) = m_values.row(rows[r]);
    return DataMatrix(m_columns, std::move(values));
}

Dag DataMatrix::empty_dag() const { return Dag(names(), roles()); }

ResidualMatrix::ResidualMatrix(std::vector<std::string> names, Eigen::MatrixXd values, std::vector<NodeRole> roles)
    : m_names(std::move(names)), m_values(std::move(values)), m_roles(std::move(roles)) {
    if (m_roles.empty()) m_roles.assign(m_names.size(), NodeRole::predictor);
    if (static_cast<Eigen::Index>(m_names.size()) != m_values.cols() || m_roles.size() != m_names.size())
        throw Error(ErrorKind::shape_mismatch, "residual names do not match matrix width");
}

ResidualMatrix ResidualMatrix::select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd values(rows(), static_cast<Eigen::Index>(names.size()));
    std::vector<NodeRole> roles;
    for (std::size_t k = 0; k < names.size(); ++k) {
        std::size_t j = 0;
        while (j < m_names.size() && m_names[j] != names[k]) ++j;
        if (j == m_names.size()) throw Error(ErrorKind::unknown_node, "unknown residual column '" + names[k] + "'");
        values.col(static_cast<Eigen::Index>(k)) = m_values.col(static_cast<Eigen::Index>(j));
        roles.push_back(m_roles[j]);
    }
    return ResidualMatrix(names, std::move(values), std::move(roles));
}

ResidualMatrix ResidualMatrix::without_role(NodeRole role) const {
    std::vector<std::string> keep;
    for (std::size_t j = 0; j < m_names.size(); ++j) {
        if (m_roles[j] != role) keep.push_back(m_names[j]);
    }
    return select(keep);
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
    if (values.rows() < 2) throw Error(ErrorKind::degenerate_input, "need at least 2 rows to standardize");
    Eigen::MatrixXd out = values.rowwise() - values.colwise().mean();
    const double denom = static_cast<double>(values.rows() - 1);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / denom);
        const double scale = values.col(j).cwiseAbs().maxCoeff();
        if (!(sd > 1e-12 * std::max(scale, 1e-300))) {
            const std::string label =
                j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)] : std::to_string(j);
            throw Error(ErrorKind::degenerate_input, "zero-variance column '" + label + "'");
        }
        out.col(j) /= sd;
    }
    return out;
}

}  // namespace latentdag
