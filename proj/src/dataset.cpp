#include "causalmb/dataset.hpp"

#include <unordered_set>

#include "causalmb/errors.hpp"

namespace causalmb {

DiscreteDataset::DiscreteDataset(std::vector<Variable> variables, Provenance provenance)
    : variables_(std::move(variables)), provenance_(provenance) {
    std::unordered_set<std::string> seen;
    for (const auto& v : variables_) {
        if (v.arity < 2) throw validation_error("variable " + v.name + " must have arity >= 2");
        if (!seen.insert(v.name).second) throw validation_error("duplicate column name: " + v.name);
    }
    columns_.resize(variables_.size());
}

int DiscreteDataset::index_of(const std::string& name) const {
    for (int i = 0; i < n_variables(); ++i)
        if (variables_[i].name == name) return i;
    throw validation_error("unknown variable: " + name);
}

bool DiscreteDataset::has_variable(const std::string& name) const {
    for (const auto& v : variables_)
        if (v.name == name) return true;
    return false;
}

void DiscreteDataset::append_row(const std::vector<int>& values) {
    if (static_cast<int>(values.size()) != n_variables())
        throw validation_error("row width does not match the schema");
    for (int i = 0; i < n_variables(); ++i) {
        if (values[i] < 0 || values[i] >= variables_[i].arity)
            throw validation_error("value out of range for variable " + variables_[i].name);
    }
    for (int i = 0; i < n_variables(); ++i) columns_[i].push_back(static_cast<uint8_t>(values[i]));
    ++n_rows_;
}

void DiscreteDataset::reserve(int64_t rows) {
    for (auto& c : columns_) c.reserve(static_cast<size_t>(rows));
}

bool DiscreteDataset::same_schema(const DiscreteDataset& other) const {
    if (n_variables() != other.n_variables()) return false;
    for (int i = 0; i < n_variables(); ++i) {
        if (variables_[i].name != other.variables_[i].name ||
            variables_[i].arity != other.variables_[i].arity)
            return false;
    }
    return true;
}

DiscreteDataset DiscreteDataset::concat(const DiscreteDataset& a, const DiscreteDataset& b,
                                        Provenance provenance) {
    if (!a.same_schema(b)) throw validation_error("cannot concatenate datasets with different schemas");
    DiscreteDataset out(a.variables_, provenance);
    out.n_rows_ = a.n_rows_ + b.n_rows_;
    for (int i = 0; i < a.n_variables(); ++i) {
        out.columns_[i] = a.columns_[i];
        out.columns_[i].insert(out.columns_[i].end(), b.columns_[i].begin(), b.columns_[i].end());
    }
    return out;
}

}  // namespace causalmb
