#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccx {

// Error raised by malformed models, spec files, or rule expressions.
// Maps to CLI exit code 2.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Error raised by a well-formed model refusing a query (impossible evidence,
// conditioning on a descendant, empty subgroup, ...). Maps to CLI exit code 1.
class QueryError : public std::runtime_error {
 public:
  explicit QueryError(const std::string& what) : std::runtime_error(what) {}
};

// Distributions must sum to one within this tolerance.
inline constexpr double kNormalizationTol = 1e-12;
// Default tolerance for comparing probabilities.
inline constexpr double kCompareTol = 1e-9;

constexpr int kUnset = -1;

// One endogenous variable of the concept vocabulary. Values are referred to
// by integer code = index into `domain`.
struct ConceptVariable {
  std::string name;
  std::vector<std::string> domain;  // ordered value labels, cardinality >= 2
  bool is_target_concept = false;   // concept matching the predicted attribute
};

// The ordered concept vocabulary shared by causal model, data map and
// classifier. Node index = position in `concepts`.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<ConceptVariable> concepts);

  int size() const { return static_cast<int>(concepts_.size()); }
  const ConceptVariable& concept(int i) const { return concepts_.at(i); }
  const std::vector<ConceptVariable>& concepts() const { return concepts_; }

  // -1 when the name is unknown.
  int index_of(const std::string& name) const;
  int require(const std::string& name) const;  // throws SpecError

  int cardinality(int i) const { return static_cast<int>(concepts_.at(i).domain.size()); }
  // -1 when the label is not in the domain of concept i.
  int code_of(int i, const std::string& label) const;
  const std::string& label_of(int i, int code) const { return concepts_.at(i).domain.at(code); }

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<ConceptVariable> concepts_;
  std::vector<std::pair<std::string, int>> by_name_;  // sorted
};

// Total or partial assignment of concept values, coded, aligned with a
// Vocabulary (kUnset marks absent entries).
using Assignment = std::vector<int>;

inline bool is_total(const Assignment& a) {
  for (int v : a)
    if (v == kUnset) return false;
  return !a.empty();
}

inline int assigned_count(const Assignment& a) {
  int n = 0;
  for (int v : a) n += (v != kUnset);
  return n;
}

// An intervention do(z̄ = z̄') is a non-empty partial assignment over
// concept variables only.
struct Intervention {
  Assignment targets;  // kUnset where untouched
};

// Closed probability interval. `exact` distinguishes exhaustive vertex-product
// optimization from sampled inner approximation.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = true;

  double width() const { return upper - lower; }
  bool contains(double v, double tol = kCompareTol) const {
    return v >= lower - tol && v <= upper + tol;
  }
};

// Mixed-radix rank of a value tuple, first position most significant.
// Used for parent-assignment ranks and canonical function indices.
std::size_t mixed_radix_rank(const std::vector<int>& values, const std::vector<int>& cards);
std::vector<int> mixed_radix_unrank(std::size_t rank, const std::vector<int>& cards);
// Product of cardinalities, throws SpecError past `cap`.
std::size_t mixed_radix_size(const std::vector<int>& cards, std::size_t cap);

// Deterministic uniform draw in [0, n) by rejection; stable across platforms
// (std::uniform_int_distribution is implementation-defined).
std::uint64_t uniform_index(std::uint64_t n, class SplitRng& rng);

// Thin deterministic RNG wrapper around xoshiro-style splitmix64 seeding of
// mt19937_64 output; fixed algorithm so sampled artifacts reproduce anywhere.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed);
  std::uint64_t next_u64();
  double next_unit();  // in [0, 1), 53-bit resolution

 private:
  std::uint64_t state_[4];
};

}  // namespace ccx
