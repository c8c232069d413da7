#include "cglmp/count_table.hpp"

#include <stdexcept>

namespace cglmp {

CountTable::CountTable(int d) : d_(d) {
  if (d < 2) throw std::invalid_argument("table dimension must be at least 2");
  for (auto& row : blocks_)
    for (auto& block : row) block.assign(static_cast<std::size_t>(d) * d, 0);
}

std::int64_t& CountTable::at(int basis_a, int basis_b, int outcome_a, int outcome_b) {
  if (basis_a < 0 || basis_a > 1 || basis_b < 0 || basis_b > 1 || outcome_a < 0 ||
      outcome_a >= d_ || outcome_b < 0 || outcome_b >= d_)
    throw std::invalid_argument("table index out of range");
  return blocks_[basis_a][basis_b][static_cast<std::size_t>(outcome_a) * d_ + outcome_b];
}

std::int64_t CountTable::at(int basis_a, int basis_b, int outcome_a,
                            int outcome_b) const {
  return const_cast<CountTable*>(this)->at(basis_a, basis_b, outcome_a, outcome_b);
}

std::int64_t CountTable::block_total(int basis_a, int basis_b) const {
  std::int64_t total = 0;
  for (int la = 0; la < d_; ++la)
    for (int lb = 0; lb < d_; ++lb) total += at(basis_a, basis_b, la, lb);
  return total;
}

void CountTable::validate() const {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (int la = 0; la < d_; ++la)
        for (int lb = 0; lb < d_; ++lb)
          if (at(a, b, la, lb) < 0)
            throw std::invalid_argument("counts must be non-negative");
      if (block_total(a, b) <= 0)
        throw std::invalid_argument("every basis block needs a positive total");
    }
}

void CountTable::set_metadata(const std::string& key, const std::string& value) {
  if (key.empty() || key.find('=') != std::string::npos ||
      key.find('\n') != std::string::npos || value.find('\n') != std::string::npos)
    throw std::invalid_argument("metadata keys must be nonempty, without '=' or newlines");
  if (key == "dimension")
    throw std::invalid_argument("'dimension' is reserved for the CSV writer");
  metadata_[key] = value;
}

bool CountTable::operator==(const CountTable& other) const {
  return d_ == other.d_ && blocks_ == other.blocks_ && metadata_ == other.metadata_;
}

}  // namespace cglmp
