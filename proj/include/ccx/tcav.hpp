#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccx/world.hpp"

namespace ccx {

// Scorer exposing an intermediate activation f(x) and a class logit g(a, y)
// whose gradient with respect to the activation exists. Rule classifiers get
// a declared smooth surrogate; see SmoothRuleScorer.
class DifferentiableScorer {
 public:
  virtual ~DifferentiableScorer() = default;
  virtual int activation_dim() const = 0;
  virtual std::vector<double> activation(const std::vector<int>& x) const = 0;
  virtual double logit(const std::vector<double>& activation, int class_code) const = 0;
  // Analytic gradient of the logit wrt the activation, when available.
  virtual std::optional<std::vector<double>> analytic_gradient(
      const std::vector<double>& activation, int class_code) const {
    (void)activation;
    (void)class_code;
    return std::nullopt;
  }
};

// logit(a, y) = w_yᵀ a + b_y over a per-slot affine embedding of x.
class LinearScorer : public DifferentiableScorer {
 public:
  LinearScorer(std::vector<std::vector<double>> class_weights, std::vector<double> class_bias,
               std::vector<double> slot_scale = {}, std::vector<double> slot_offset = {});

  int activation_dim() const override { return dim_; }
  std::vector<double> activation(const std::vector<int>& x) const override;
  double logit(const std::vector<double>& activation, int class_code) const override;
  std::optional<std::vector<double>> analytic_gradient(const std::vector<double>& activation,
                                                       int class_code) const override;

 private:
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
  std::vector<double> scale_, offset_;
  int dim_ = 0;
};

// Smooth surrogate for a rule classifier: the activation is a per-slot affine
// embedding of the features, predicates become Gaussian bumps around their
// target code, conjunction is a product, disjunction its complement, and the
// class logit is the log-odds of the soft truth value. Thresholding the soft
// truth at 0.5 recovers the hard rule on integer-coded inputs.
class SmoothRuleScorer : public DifferentiableScorer {
 public:
  SmoothRuleScorer(std::shared_ptr<const RuleClassifier> classifier,
                   const SyntheticTabularMap& map, double sharpness = 4.0);

  int activation_dim() const override { return dim_; }
  std::vector<double> activation(const std::vector<int>& x) const override;
  double logit(const std::vector<double>& activation, int class_code) const override;

  double soft_truth(const std::vector<double>& activation) const;

 private:
  struct Node {
    RuleExpr::Kind kind;
    int slot = 0;
    double code = 0.0;
    std::vector<int> children;
  };
  int compile(const RuleExpr& expr, const SyntheticTabularMap& map);
  double eval_node(int node, const std::vector<double>& activation) const;

  std::shared_ptr<const RuleClassifier> classifier_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;
  double sharpness_ = 4.0;
};

// Learned linear concept probe: coefficient vector in activation space plus
// its held-out accuracy.
struct ConceptDirection {
  std::string concept;
  std::vector<double> vector;
  double heldout_accuracy = 0.0;
};

struct ProbeOptions {
  int iterations = 2000;
  double learning_rate = 0.5;
  double l2_penalty = 1e-3;
  double heldout_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Logistic-regression probe fit by full-batch gradient descent with a fixed
// iteration count; deterministic for a fixed seed. Throws QueryError when the
// training data is single-class.
ConceptDirection train_probe(const std::vector<std::vector<double>>& activations,
                             const std::vector<int>& labels, const ProbeOptions& options,
                             const std::string& concept_name = {});

enum class GradientMode { PreferAnalytic, FiniteDifference };

// Directional derivative of the class logit along `direction` at f(x).
// Finite differences are central with step 1e-5.
double sensitivity(const DifferentiableScorer& scorer, const std::vector<int>& x, int class_code,
                   const std::vector<double>& direction,
                   GradientMode mode = GradientMode::PreferAnalytic);

// Fraction of background instances with strictly positive sensitivity.
// Zero counts as not positive.
double tcav_score(const DifferentiableScorer& scorer, int class_code,
                  const std::vector<double>& direction, const Dataset& background,
                  GradientMode mode = GradientMode::PreferAnalytic);

}  // namespace ccx
