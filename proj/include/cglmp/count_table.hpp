#ifndef CGLMP_COUNT_TABLE_HPP
#define CGLMP_COUNT_TABLE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cglmp {

// Raw coincidence counts per (basis_a, basis_b, outcome_a, outcome_b), plus
// free-form metadata (acquisition settings, seeds, ...). Counts are
// non-negative; each basis block must have a positive total before analysis.
class CountTable {
 public:
  explicit CountTable(int d);

  int dim() const { return d_; }
  std::int64_t& at(int basis_a, int basis_b, int outcome_a, int outcome_b);
  std::int64_t at(int basis_a, int basis_b, int outcome_a, int outcome_b) const;
  std::int64_t block_total(int basis_a, int basis_b) const;

  void validate() const;

  const std::map<std::string, std::string>& metadata() const { return metadata_; }
  void set_metadata(const std::string& key, const std::string& value);

  bool operator==(const CountTable& other) const;

 private:
  int d_;
  std::array<std::array<std::vector<std::int64_t>, 2>, 2> blocks_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace cglmp

#endif
