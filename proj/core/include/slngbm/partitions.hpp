#pragma once

#include <string>
#include <vector>

namespace slngbm {

/// Integer partition indexing a trace monomial: parts (p_1 >= p_2 >= ...)
/// stand for the observable prod_i tr G^{p_i} of total degree sum(p_i).
struct Partition {
  std::vector<int> parts;

  int degree() const;
  int count() const { return static_cast<int>(parts.size()); }
  std::string to_string() const;  // e.g. "2+1+1"

  bool operator==(const Partition& other) const { return parts == other.parts; }
};

/// All partitions of p in canonical reverse-lexicographic order:
/// (p), (p-1,1), ..., (1,...,1). Supported for 1 <= p <= 8.
std::vector<Partition> partitions(int p);

/// Number of partitions of p (1..8): 1, 2, 3, 5, 7, 11, 15, 22.
int partition_count(int p);

int max_partition_degree();  // 8, the moment-engine degree cap

}  // namespace slngbm
