#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace phylo {

// Leaf labels are strings.  When every label is a positive integer written in
// canonical form the ordering is numeric, otherwise lexicographic; "the first
// m leaves" always means the first m labels under this ordering.
bool labels_are_integers(const std::vector<std::string>& labels);
bool label_less(const std::string& a, const std::string& b, bool numeric);
std::vector<int> label_order(const std::vector<std::string>& labels);
std::vector<std::string> sorted_labels(const std::vector<std::string>& labels);

inline double binom2(int m) { return 0.5 * static_cast<double>(m) * (m - 1); }

// LEB128 unsigned varint, used by the mutation-event sidecar.
void put_varint(std::vector<uint8_t>& out, uint64_t v);
uint64_t get_varint(const uint8_t* data, size_t size, size_t& pos);

std::string format_double(double v);  // %.17g, round-trip exact

}  // namespace phylo
