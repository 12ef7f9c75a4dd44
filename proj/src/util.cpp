#include "phylo/util.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace phylo {

bool labels_are_integers(const std::vector<std::string>& labels) {
  for (const auto& s : labels) {
    if (s.empty() || s[0] == '0') return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    if (s.size() > 18) return false;
  }
  return true;
}

bool label_less(const std::string& a, const std::string& b, bool numeric) {
  if (numeric) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
  return a < b;
}

std::vector<int> label_order(const std::vector<std::string>& labels) {
  const bool numeric = labels_are_integers(labels);
  std::vector<int> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    return label_less(labels[i], labels[j], numeric);
  });
  return idx;
}

std::vector<std::string> sorted_labels(const std::vector<std::string>& labels) {
  auto idx = label_order(labels);
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int i : idx) out.push_back(labels[i]);
  return out;
}

void put_varint(std::vector<uint8_t>& out, uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<uint8_t>(v));
}

uint64_t get_varint(const uint8_t* data, size_t size, size_t& pos) {
  uint64_t v = 0;
  int shift = 0;
  while (true) {
    if (pos >= size) throw std::runtime_error("varint: truncated input");
    const uint8_t b = data[pos++];
    v |= static_cast<uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
    shift += 7;
    if (shift > 63) throw std::runtime_error("varint: overlong encoding");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace phylo
