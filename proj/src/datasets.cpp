#include <array>
#include <stdexcept>
#include <string>

#include "cglmp/io.hpp"

namespace cglmp {

namespace {

// Published 120 s coincidence tables at mu = 0.01. Row r is Alice
// (basis r/4, outcome r%4), column c is Bob (basis c/4, outcome c%4).
constexpr std::array<std::array<std::int64_t, 8>, 8> kMesCounts{{
    {605, 72, 34, 49, 493, 36, 37, 67},
    {46, 453, 74, 17, 62, 545, 31, 38},
    {29, 40, 508, 85, 30, 45, 555, 27},
    {102, 32, 33, 535, 26, 26, 48, 671},
    {102, 529, 40, 47, 515, 94, 23, 53},
    {30, 28, 473, 28, 22, 445, 92, 24},
    {47, 15, 97, 581, 25, 28, 581, 98},
    {611, 22, 18, 48, 67, 27, 34, 600},
}};

constexpr std::array<std::array<std::int64_t, 8>, 8> kOesCounts{{
    {544, 38, 21, 60, 517, 54, 33, 30},
    {57, 426, 46, 24, 24, 458, 47, 53},
    {29, 63, 470, 25, 20, 26, 453, 53},
    {30, 49, 63, 408, 57, 43, 21, 445},
    {57, 462, 64, 42, 517, 40, 18, 84},
    {52, 29, 422, 35, 57, 398, 44, 20},
    {70, 28, 51, 439, 56, 80, 430, 31},
    {459, 55, 48, 30, 44, 40, 71, 408},
}};

CountTable build(const std::array<std::array<std::int64_t, 8>, 8>& rows,
                 const std::string& name) {
  CountTable table(4);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      table.at(r / 4, c / 4, r % 4, c % 4) = rows[r][c];
  table.set_metadata("name", name);
  table.set_metadata("mu", "0.01");
  table.set_metadata("seconds_per_setting", "120");
  return table;
}

}  // namespace

CountTable dataset(std::string_view name) {
  if (name == "mes") return build(kMesCounts, "mes");
  if (name == "oes") {
    CountTable table = build(kOesCounts, "oes");
    table.set_metadata("pump_gamma", "0.738");
    return table;
  }
  throw std::invalid_argument("unknown dataset: " + std::string(name));
}

}  // namespace cglmp
