#include "ccx/types.hpp"

#include <algorithm>

namespace ccx {

Vocabulary::Vocabulary(std::vector<ConceptVariable> concepts) : concepts_(std::move(concepts)) {
  by_name_.reserve(concepts_.size());
  for (int i = 0; i < static_cast<int>(concepts_.size()); ++i) {
    by_name_.emplace_back(concepts_[i].name, i);
  }
  std::sort(by_name_.begin(), by_name_.end());
}

int Vocabulary::index_of(const std::string& name) const {
  auto it = std::lower_bound(by_name_.begin(), by_name_.end(),
                             std::make_pair(name, 0),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  if (it == by_name_.end() || it->first != name) return -1;
  return it->second;
}

int Vocabulary::require(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw SpecError("unknown concept '" + name + "'");
  return i;
}

int Vocabulary::code_of(int i, const std::string& label) const {
  const auto& dom = concepts_.at(i).domain;
  for (int c = 0; c < static_cast<int>(dom.size()); ++c)
    if (dom[c] == label) return c;
  return -1;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  if (concepts_.size() != other.concepts_.size()) return false;
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    const auto& a = concepts_[i];
    const auto& b = other.concepts_[i];
    if (a.name != b.name || a.domain != b.domain || a.is_target_concept != b.is_target_concept)
      return false;
  }
  return true;
}

std::size_t mixed_radix_rank(const std::vector<int>& values, const std::vector<int>& cards) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    r = r * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(values[i]);
  }
  return r;
}

std::vector<int> mixed_radix_unrank(std::size_t rank, const std::vector<int>& cards) {
  std::vector<int> values(cards.size(), 0);
  for (std::size_t i = cards.size(); i-- > 0;) {
    values[i] = static_cast<int>(rank % static_cast<std::size_t>(cards[i]));
    rank /= static_cast<std::size_t>(cards[i]);
  }
  return values;
}

std::size_t mixed_radix_size(const std::vector<int>& cards, std::size_t cap) {
  std::size_t n = 1;
  for (int c : cards) {
    if (c <= 0) throw SpecError("empty domain in enumeration");
    if (n > cap / static_cast<std::size_t>(c)) {
      throw SpecError("enumeration space exceeds cap of " + std::to_string(cap));
    }
    n *= static_cast<std::size_t>(c);
  }
  return n;
}

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

SplitRng::SplitRng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

// xoshiro256** step; fully specified, unlike distribution adaptors.
std::uint64_t SplitRng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double SplitRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(std::uint64_t n, SplitRng& rng) {
  if (n == 0) throw QueryError("uniform_index over empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = rng.next_u64();
  } while (draw >= limit);
  return draw % n;
}

}  // namespace ccx
