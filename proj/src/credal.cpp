#include "ccx/credal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ccx {

namespace {

constexpr double kVertexTol = 1e-9;
constexpr double kPivotTol = 1e-11;

std::size_t checked_pow(std::size_t base, std::size_t exp, std::size_t cap, const std::string& what) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (result > cap / base)
      throw SpecError(what + " would exceed the cap of " + std::to_string(cap) + " functions");
    result *= base;
  }
  return result;
}

// Gaussian elimination on [A | b]; returns the unique solution when the
// column rank equals the column count and the system is consistent.
std::optional<std::vector<double>> solve_exact(std::vector<std::vector<double>> a,
                                               std::vector<double> b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::vector<std::size_t> pivot_row_of_col(cols, SIZE_MAX);
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < cols && pivot_row < rows; ++col) {
    std::size_t best = pivot_row;
    for (std::size_t r = pivot_row + 1; r < rows; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    if (std::abs(a[best][col]) < kPivotTol) continue;
    std::swap(a[best], a[pivot_row]);
    std::swap(b[best], b[pivot_row]);
    const double piv = a[pivot_row][col];
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pivot_row) continue;
      const double factor = a[r][col] / piv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < cols; ++c) a[r][c] -= factor * a[pivot_row][c];
      b[r] -= factor * b[pivot_row];
    }
    pivot_row_of_col[col] = pivot_row;
    ++pivot_row;
  }
  // rank deficiency in the columns -> not a basis
  for (std::size_t col = 0; col < cols; ++col)
    if (pivot_row_of_col[col] == SIZE_MAX) return std::nullopt;
  // inconsistent leftover rows -> no solution
  for (std::size_t r = pivot_row; r < rows; ++r) {
    if (std::abs(b[r]) > 1e-8) return std::nullopt;
  }
  std::vector<double> x(cols, 0.0);
  for (std::size_t col = 0; col < cols; ++col) {
    const std::size_t r = pivot_row_of_col[col];
    x[col] = b[r] / a[r][col];
  }
  return x;
}

std::size_t matrix_rank(std::vector<std::vector<double>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t best = rank;
    for (std::size_t r = rank + 1; r < rows; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    if (std::abs(a[best][col]) < kPivotTol) continue;
    std::swap(a[best], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double factor = a[r][col] / a[rank][col];
      for (std::size_t c = col; c < cols; ++c) a[r][c] -= factor * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - k + i) / i;
  }
  return result;
}

std::string format_vertex(const std::vector<double>& v) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ")";
  return out.str();
}

}  // namespace

FunctionFamily canonical_family(const std::string& child, const std::vector<std::string>& parents,
                                int child_card, const std::vector<int>& parent_cards,
                                const CredalOptions& options) {
  if (child_card < 1) throw SpecError("empty child domain for '" + child + "'");
  for (int c : parent_cards)
    if (c < 1) throw SpecError("empty parent domain for '" + child + "'");
  const std::size_t pa_space = mixed_radix_size(parent_cards, std::size_t{1} << 30);
  const std::size_t count =
      checked_pow(static_cast<std::size_t>(child_card), pa_space, options.max_canonical_functions,
                  "canonical family for '" + child + "'");
  FunctionFamily family;
  family.child = child;
  family.parents = parents;
  family.allowed.reserve(count);
  for (std::size_t u = 0; u < count; ++u) {
    std::vector<int> f(pa_space, 0);
    std::size_t rest = u;
    for (std::size_t j = pa_space; j-- > 0;) {
      f[j] = static_cast<int>(rest % static_cast<std::size_t>(child_card));
      rest /= static_cast<std::size_t>(child_card);
    }
    family.allowed.push_back(std::move(f));
  }
  return family;
}

Pscm canonical_pscm(const Vocabulary& vocab, const CausalGraph& graph,
                    const CredalOptions& options) {
  Pscm pscm;
  pscm.vocab = vocab;
  pscm.graph = graph;
  pscm.families.reserve(vocab.size());
  for (int i = 0; i < vocab.size(); ++i) {
    const auto& name = vocab.concept(i).name;
    auto parents = graph.parents_of(name);
    std::vector<int> cards;
    for (const auto& p : parents) cards.push_back(vocab.cardinality(vocab.require(p)));
    pscm.families.push_back(canonical_family(name, parents, vocab.cardinality(i), cards, options));
  }
  return pscm;
}

NodeConditional induced_conditional(const FunctionFamily& family, const std::vector<double>& weights,
                                    int child_card) {
  if (weights.size() != family.allowed.size())
    throw SpecError("weight count does not match family size for '" + family.child + "'");
  const std::size_t pa_space = family.allowed.empty() ? 1 : family.allowed.front().size();
  NodeConditional conditional;
  conditional.columns.resize(pa_space);
  for (std::size_t pa = 0; pa < pa_space; ++pa) {
    std::vector<double> column(child_card, 0.0);
    for (std::size_t u = 0; u < family.allowed.size(); ++u) column[family.allowed[u][pa]] += weights[u];
    conditional.columns[pa] = std::move(column);
  }
  return conditional;
}

Conditionals induced_conditionals(const Fscm& model) {
  Conditionals out;
  out.nodes.reserve(model.vocab.size());
  for (int i = 0; i < model.vocab.size(); ++i) {
    FunctionFamily family{model.families[i].child, model.families[i].parents,
                          model.families[i].functions};
    out.nodes.push_back(induced_conditional(family, model.exogenous[i].probabilities,
                                            model.vocab.cardinality(i)));
  }
  return out;
}

Conditionals empirical_conditionals(const Pscm& pscm, const std::vector<Assignment>& rows,
                                    bool add_one_smoothing) {
  Conditionals out;
  out.nodes.resize(pscm.vocab.size());
  for (int i = 0; i < pscm.vocab.size(); ++i) {
    const auto& family = pscm.families[i];
    std::vector<int> parent_ids;
    std::vector<int> cards;
    for (const auto& p : family.parents) {
      int pi = pscm.vocab.require(p);
      parent_ids.push_back(pi);
      cards.push_back(pscm.vocab.cardinality(pi));
    }
    const std::size_t pa_space = mixed_radix_size(cards, std::size_t{1} << 30);
    const int child_card = pscm.vocab.cardinality(i);
    std::vector<std::vector<double>> counts(pa_space, std::vector<double>(child_card, 0.0));
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != pscm.vocab.size() || !is_total(row))
        throw SpecError("conditional estimation requires total concept rows");
      std::vector<int> pv;
      pv.reserve(parent_ids.size());
      for (int p : parent_ids) pv.push_back(row[p]);
      counts[mixed_radix_rank(pv, cards)][row[i]] += 1.0;
    }
    out.nodes[i].columns.resize(pa_space);
    for (std::size_t pa = 0; pa < pa_space; ++pa) {
      double total = 0.0;
      for (double c : counts[pa]) total += c;
      if (add_one_smoothing) {
        std::vector<double> column(child_card);
        for (int v = 0; v < child_card; ++v) column[v] = (counts[pa][v] + 1.0) / (total + child_card);
        out.nodes[i].columns[pa] = std::move(column);
      } else if (total > 0.0) {
        std::vector<double> column(child_card);
        for (int v = 0; v < child_card; ++v) column[v] = counts[pa][v] / total;
        out.nodes[i].columns[pa] = std::move(column);
      }
      // unseen configuration, no smoothing: column stays unconstrained
    }
  }
  return out;
}

CredalPolytope credal_constraints(const FunctionFamily& family, const NodeConditional& conditional,
                                  int child_card) {
  const std::size_t n = family.allowed.size();
  if (n == 0) throw SpecError("empty family for '" + family.child + "'");
  const std::size_t pa_space = family.allowed.front().size();
  if (conditional.columns.size() != pa_space)
    throw SpecError("conditional table shape mismatch for '" + family.child + "'");

  CredalPolytope polytope;
  polytope.variable = family.child;
  polytope.dimension = n;
  for (std::size_t pa = 0; pa < pa_space; ++pa) {
    if (!conditional.columns[pa]) continue;
    const auto& column = *conditional.columns[pa];
    double sum = 0.0;
    for (double p : column) sum += p;
    if (std::abs(sum - 1.0) > 1e-9)
      throw SpecError("conditional column for '" + family.child + "' does not sum to 1");
    // last child value is implied by the simplex; drop its row
    for (int v = 0; v + 1 < child_card; ++v) {
      std::vector<double> row(n, 0.0);
      for (std::size_t u = 0; u < n; ++u) row[u] = family.allowed[u][pa] == v ? 1.0 : 0.0;
      polytope.rows.push_back(std::move(row));
      polytope.rhs.push_back(column[v]);
    }
  }

  // feasibility: at least one basic feasible solution must exist
  CredalOptions probe_options;
  if (enumerate_vertices(polytope, probe_options).vertices.empty())
    throw QueryError("family inconsistent with data for '" + family.child +
                     "': no weight vector reproduces the conditional");
  return polytope;
}

VertexSet enumerate_vertices(const CredalPolytope& polytope, const CredalOptions& options) {
  const std::size_t n = polytope.dimension;
  std::vector<std::vector<double>> a = polytope.rows;
  std::vector<double> b = polytope.rhs;
  a.push_back(std::vector<double>(n, 1.0));  // simplex sum row
  b.push_back(1.0);

  const std::size_t rank = matrix_rank(a);
  const std::size_t combos = binomial_capped(n, rank, options.max_basis_combinations);
  if (combos > options.max_basis_combinations) {
    throw QueryError("vertex enumeration for '" + polytope.variable + "' needs more than " +
                     std::to_string(options.max_basis_combinations) +
                     " basis checks; restrict the family or use sampled bounds (exact=false)");
  }

  VertexSet set;
  set.variable = polytope.variable;
  if (rank > n) return set;

  std::vector<std::size_t> cols(rank);
  for (std::size_t i = 0; i < rank; ++i) cols[i] = i;
  const std::size_t m = a.size();
  while (true) {
    std::vector<std::vector<double>> sub(m, std::vector<double>(rank));
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < rank; ++c) sub[r][c] = a[r][cols[c]];
    if (auto solved = solve_exact(std::move(sub), b)) {
      bool nonneg = true;
      for (double v : *solved)
        if (v < -kVertexTol) nonneg = false;
      if (nonneg) {
        std::vector<double> vertex(n, 0.0);
        for (std::size_t c = 0; c < rank; ++c) vertex[cols[c]] = std::max(0.0, (*solved)[c]);
        bool satisfies = true;
        for (std::size_t r = 0; r < m && satisfies; ++r) {
          double lhs = 0.0;
          for (std::size_t i = 0; i < n; ++i) lhs += a[r][i] * vertex[i];
          if (std::abs(lhs - b[r]) > kVertexTol) satisfies = false;
        }
        bool duplicate = false;
        for (const auto& existing : set.vertices) {
          double diff = 0.0;
          for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(existing[i] - vertex[i]));
          if (diff < kVertexTol) {
            duplicate = true;
            break;
          }
        }
        if (satisfies && !duplicate) set.vertices.push_back(std::move(vertex));
      }
    }
    // next lexicographic combination
    std::size_t i = rank;
    while (i > 0) {
      --i;
      if (cols[i] != i + n - rank) {
        ++cols[i];
        for (std::size_t j = i + 1; j < rank; ++j) cols[j] = cols[j - 1] + 1;
        break;
      }
      if (i == 0) return set;
    }
    if (rank == 0) break;
  }
  return set;
}

std::vector<VertexSet> credal_vertex_sets(const Pscm& pscm, const Conditionals& conditionals,
                                          const CredalOptions& options) {
  if (static_cast<int>(conditionals.nodes.size()) != pscm.vocab.size())
    throw SpecError("conditionals are not aligned with the vocabulary");
  std::vector<VertexSet> sets;
  sets.reserve(pscm.families.size());
  for (int i = 0; i < pscm.vocab.size(); ++i) {
    CredalPolytope polytope =
        credal_constraints(pscm.families[i], conditionals.nodes[i], pscm.vocab.cardinality(i));
    VertexSet set = enumerate_vertices(polytope, options);
    if (set.vertices.empty())
      throw QueryError("family inconsistent with data for '" + pscm.families[i].child + "'");
    sets.push_back(std::move(set));
  }
  return sets;
}

namespace {

Fscm working_model(const Pscm& pscm) {
  Fscm model;
  model.vocab = pscm.vocab;
  model.graph = pscm.graph;
  for (const auto& family : pscm.families) {
    model.families.push_back({family.child, family.parents, family.allowed});
    model.exogenous.push_back(
        {"u_" + family.child, std::vector<double>(family.allowed.size(), 0.0)});
  }
  return model;
}

}  // namespace

Interval counterfactual_bounds(const Pscm& pscm, const Conditionals& conditionals,
                               const FscmQuery& query, const CredalOptions& options,
                               BoundsDiagnostics* diagnostics) {
  std::vector<VertexSet> sets = credal_vertex_sets(pscm, conditionals, options);
  const int n = pscm.vocab.size();

  std::size_t products = 1;
  bool overflow = false;
  for (const auto& set : sets) {
    if (products > options.max_exact_products / std::max<std::size_t>(1, set.vertices.size())) {
      overflow = true;
    }
    products *= set.vertices.size();
    if (overflow) break;
  }

  Fscm model = working_model(pscm);
  auto assign_vertex = [&](int node, std::size_t k) {
    model.exogenous[node].probabilities = sets[node].vertices[k];
  };

  double lo = 2.0, hi = -1.0;
  std::size_t evaluations = 0, skipped = 0;
  std::string last_member_error;
  auto consider = [&]() {
    try {
      double value = query(model);
      ++evaluations;
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    } catch (const QueryError& e) {
      ++skipped;  // this member assigns zero probability to the evidence
      last_member_error = e.what();
    }
  };

  bool exact = !overflow && products <= options.max_exact_products;
  if (exact) {
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      for (int i = 0; i < n; ++i) assign_vertex(i, pick[i]);
      consider();
      int carry = n - 1;
      while (carry >= 0) {
        if (++pick[carry] < sets[carry].vertices.size()) break;
        pick[carry] = 0;
        --carry;
      }
      if (carry < 0) break;
    }
  } else {
    SplitRng rng(options.sample_seed);
    for (std::size_t s = 0; s < options.sample_count; ++s) {
      for (int i = 0; i < n; ++i)
        assign_vertex(i, uniform_index(sets[i].vertices.size(), rng));
      consider();
    }
  }

  if (evaluations == 0)
    throw QueryError("query undefined for every credal member; last error: " + last_member_error);
  if (diagnostics) {
    diagnostics->vertex_products = exact ? products : options.sample_count;
    diagnostics->evaluations = evaluations;
    diagnostics->skipped_impossible = skipped;
    diagnostics->vertices_per_node.clear();
    for (const auto& set : sets) diagnostics->vertices_per_node.push_back(set.vertices.size());
  }
  Interval interval;
  interval.lower = std::max(0.0, lo);
  interval.upper = std::min(1.0, hi);
  interval.exact = exact;
  return interval;
}

Fscm unique_fscm(const Pscm& pscm, const Conditionals& conditionals, const CredalOptions& options) {
  std::vector<VertexSet> sets = credal_vertex_sets(pscm, conditionals, options);
  Fscm model = working_model(pscm);
  for (int i = 0; i < pscm.vocab.size(); ++i) {
    const auto& vertices = sets[i].vertices;
    if (vertices.size() != 1) {
      throw QueryError("underdetermined: " + std::to_string(vertices.size()) + " vertices for '" +
                       pscm.families[i].child + "', e.g. " + format_vertex(vertices[0]) + " and " +
                       format_vertex(vertices[1]));
    }
    std::vector<double> w = vertices[0];
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    model.exogenous[i].probabilities = std::move(w);
  }
  return model;
}

}  // namespace ccx
