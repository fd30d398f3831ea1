#include "slngbm/partitions.hpp"

#include <numeric>
#include <stdexcept>

namespace slngbm {

namespace {

constexpr int kMaxDegree = 8;

void enumerate(int remaining, int max_part, std::vector<int>& current,
               std::vector<Partition>& out) {
  if (remaining == 0) {
    out.push_back(Partition{current});
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    current.push_back(part);
    enumerate(remaining - part, part, current, out);
    current.pop_back();
  }
}

}  // namespace

int Partition::degree() const { return std::accumulate(parts.begin(), parts.end(), 0); }

std::string Partition::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += '+';
    s += std::to_string(parts[i]);
  }
  return s;
}

std::vector<Partition> partitions(int p) {
  if (p < 1 || p > kMaxDegree)
    throw std::invalid_argument("partitions: degree must be in 1..8");
  std::vector<Partition> out;
  std::vector<int> current;
  enumerate(p, p, current, out);
  return out;
}

int partition_count(int p) { return static_cast<int>(partitions(p).size()); }

int max_partition_degree() { return kMaxDegree; }

}  // namespace slngbm
