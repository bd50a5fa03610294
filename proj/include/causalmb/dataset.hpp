#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalmb {

enum class Provenance { observational, experimental, test };

struct Variable {
    std::string name;
    int arity = 2;
};

/// Column-oriented categorical data table. Cell values for a variable with
/// arity r lie in [0, r); columns are stored contiguously for counting speed.
class DiscreteDataset {
public:
    DiscreteDataset() = default;
    DiscreteDataset(std::vector<Variable> variables, Provenance provenance);

    int n_variables() const { return static_cast<int>(variables_.size()); }
    int64_t n_rows() const { return n_rows_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& variable(int i) const { return variables_[i]; }
    int index_of(const std::string& name) const;  // throws validation_error
    bool has_variable(const std::string& name) const;
    Provenance provenance() const { return provenance_; }

    const std::vector<uint8_t>& column(int i) const { return columns_[i]; }
    uint8_t at(int64_t row, int var) const { return columns_[var][row]; }

    /// Appends one row given in variable order; values are range-checked.
    void append_row(const std::vector<int>& values);
    /// Reserve row capacity up front.
    void reserve(int64_t rows);

    bool same_schema(const DiscreteDataset& other) const;

    /// Row-wise concatenation of two datasets with identical schemas.
    static DiscreteDataset concat(const DiscreteDataset& a, const DiscreteDataset& b,
                                  Provenance provenance);

private:
    std::vector<Variable> variables_;
    std::vector<std::vector<uint8_t>> columns_;
    int64_t n_rows_ = 0;
    Provenance provenance_ = Provenance::observational;
};

}  // namespace causalmb
