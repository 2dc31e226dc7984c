#include <algorithm>
#include <cmath>
#include <numeric>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/rng.hpp"

namespace bvfim {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::string to_string(Arch arch) { return arch == Arch::Linear ? "linear" : "two-layer-linear"; }

Arch parse_arch(const std::string& text) {
  if (text == "linear") return Arch::Linear;
  if (text == "two-layer-linear" || text == "two-layer") return Arch::TwoLayer;
  throw Error(ErrorKind::Config, "unknown classifier architecture '" + text + "'");
}

namespace {

// Classifier evaluation shared by f and F. Parameter layout is documented on
// HyperCleanProblem.
class Classifier {
 public:
  Classifier(Arch arch, std::size_t d, std::size_t classes, std::size_t hidden)
      : arch_(arch), d_(d), c_(classes), h_(hidden) {}

  std::size_t num_params() const {
    return arch_ == Arch::Linear ? c_ * d_ + c_ : c_ * h_ + h_ * d_;
  }

  // Cross-entropy of every sample.
  Vec losses(VecView y, const Dataset& data) const {
    Vec out(data.labels.size());
    Scratch s(*this);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(y, data.features.row(i), data.labels[i], s);
    return out;
  }

  double weighted_loss(VecView y, const Dataset& data, VecView weights) const {
    Scratch s(*this);
    double total = 0.0;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      total += w * forward(y, data.features.row(i), data.labels[i], s);
    }
    return total;
  }

  Vec weighted_grad(VecView y, const Dataset& data, VecView weights) const {
    Vec g(num_params(), 0.0);
    Scratch s(*this);
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      const VecView u = data.features.row(i);
      forward(y, u, data.labels[i], s);
      // s.logits now holds softmax - onehot
      if (arch_ == Arch::Linear) {
        ger_into(w, s.logits, u, g.data(), c_, d_);
        kernels::axpy(w, s.logits, VecSpan(g.data() + c_ * d_, c_));
      } else {
        ger_into(w, s.logits, s.hidden, g.data(), c_, h_);
        // back = W2^T r
        kernels::active().gemv_t(y.data(), c_, h_, s.logits.data(), s.back.data());
        ger_into(w, s.back, u, g.data() + c_ * h_, h_, d_);
      }
    }
    return g;
  }

  int predict(VecView y, VecView u) const {
    Scratch s(*this);
    logits(y, u, s);
    return static_cast<int>(std::max_element(s.logits.begin(), s.logits.end()) - s.logits.begin());
  }

 private:
  struct Scratch {
    explicit Scratch(const Classifier& c) : logits(c.c_), hidden(c.h_), back(c.h_) {}
    Vec logits;
    Vec hidden;
    Vec back;
  };

  static void ger_into(double alpha, VecView u, VecView v, double* a, std::size_t rows, std::size_t cols) {
    kernels::active().ger(alpha, u.data(), rows, v.data(), cols, a);
  }

  void logits(VecView y, VecView u, Scratch& s) const {
    const auto& k = kernels::active();
    if (arch_ == Arch::Linear) {
      k.gemv(y.data(), c_, d_, u.data(), s.logits.data());
      for (std::size_t c = 0; c < c_; ++c) s.logits[c] += y[c_ * d_ + c];
    } else {
      k.gemv(y.data() + c_ * h_, h_, d_, u.data(), s.hidden.data());
      k.gemv(y.data(), c_, h_, s.hidden.data(), s.logits.data());
    }
  }

  // Returns the cross-entropy and leaves softmax - onehot in s.logits.
  double forward(VecView y, VecView u, int label, Scratch& s) const {
    logits(y, u, s);
    const double mx = *std::max_element(s.logits.begin(), s.logits.end());
    const double shifted_target = s.logits[static_cast<std::size_t>(label)] - mx;
    double z = 0.0;
    for (double& l : s.logits) {
      l = std::exp(l - mx);
      z += l;
    }
    for (double& l : s.logits) l /= z;
    s.logits[static_cast<std::size_t>(label)] -= 1.0;
    return std::log(z) - shifted_target;
  }

  Arch arch_;
  std::size_t d_, c_, h_;
};

Dataset sample_split(Rng& rng, const std::vector<Vec>& means, std::size_t count) {
  const std::size_t classes = means.size();
  const std::size_t d = means.front().size();
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % classes);
  rng.shuffle(std::span<int>(labels));
  Dataset out{Matrix(count, d), labels};
  for (std::size_t i = 0; i < count; ++i) {
    const Vec& mu = means[static_cast<std::size_t>(labels[i])];
    for (std::size_t j = 0; j < d; ++j) out.features(i, j) = mu[j] + rng.normal();
  }
  return out;
}

}  // namespace

double HyperCleanProblem::accuracy(VecView y, const Dataset& data) const {
  const Classifier clf(options.arch, options.d, options.classes, options.hidden);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    if (clf.predict(y, data.features.row(i)) == data.labels[i]) ++hits;
  return data.labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(data.labels.size());
}

Vec HyperCleanProblem::initial_y(std::uint64_t seed) const {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Vec y(problem.dim_y);
  for (double& v : y) v = 0.1 * rng.normal();
  return y;
}

HyperCleanProblem make_hyperclean(const HyperCleanOptions& opt) {
  if (opt.classes < 2) throw Error(ErrorKind::Config, "hyperclean: classes must be at least 2");
  if (opt.d == 0 || opt.n_tr == 0 || opt.n_val == 0 || opt.hidden == 0)
    throw Error(ErrorKind::Config, "hyperclean: d, n_tr, n_val and hidden must be positive");
  if (opt.classes > opt.d) throw Error(ErrorKind::Config, "hyperclean: classes must not exceed d");

  // Stream order: class-mean coordinates, train, val, test, corruption.
  Rng rng(opt.seed);
  std::vector<std::size_t> axes(opt.d);
  std::iota(axes.begin(), axes.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(axes));
  // Means on distinct coordinate axes at radius sep/sqrt(2): pairwise distance = sep.
  std::vector<Vec> means(opt.classes, Vec(opt.d, 0.0));
  for (std::size_t c = 0; c < opt.classes; ++c) means[c][axes[c]] = opt.separation / std::sqrt(2.0);

  HyperCleanProblem hc;
  hc.options = opt;
  Dataset train = sample_split(rng, means, opt.n_tr);
  Dataset val = sample_split(rng, means, opt.n_val);
  Dataset test = sample_split(rng, means, opt.n_test);

  hc.clean_train_labels = train.labels;
  hc.corrupted.assign(opt.n_tr, false);
  std::vector<std::size_t> order(opt.n_tr);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t k = 0; k < opt.n_tr / 2; ++k) {
    const std::size_t i = order[k];
    const auto shift = 1 + static_cast<int>(rng.below(opt.classes - 1));
    train.labels[i] = (train.labels[i] + shift) % static_cast<int>(opt.classes);
    hc.corrupted[i] = true;
  }

  hc.train = std::make_shared<const Dataset>(std::move(train));
  hc.val = std::make_shared<const Dataset>(std::move(val));
  hc.test = std::make_shared<const Dataset>(std::move(test));

  const auto clf = std::make_shared<const Classifier>(opt.arch, opt.d, opt.classes, opt.hidden);
  auto tr = hc.train;
  auto va = hc.val;
  const std::size_t m = opt.n_tr;

  Problem& p = hc.problem;
  p.name = "hyperclean";
  p.dim_x = m;
  p.dim_y = clf->num_params();
  auto weights = [](VecView x) {
    Vec w(x.size());
    std::transform(x.begin(), x.end(), w.begin(), sigmoid);
    return w;
  };
  p.eval_f = [clf, tr, weights](VecView x, VecView y) { return clf->weighted_loss(y, *tr, weights(x)); };
  p.eval_F = [clf, va](VecView, VecView y) { return clf->weighted_loss(y, *va, {}); };
  p.grad_f_y = [clf, tr, weights](VecView x, VecView y) { return clf->weighted_grad(y, *tr, weights(x)); };
  p.grad_F_y = [clf, va](VecView, VecView y) { return clf->weighted_grad(y, *va, {}); };
  p.grad_F_x = [m](VecView, VecView) { return Vec(m, 0.0); };
  p.grad_f_x = [clf, tr](VecView x, VecView y) {
    Vec g = clf->losses(y, *tr);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = sigmoid(x[i]);
      g[i] *= s * (1.0 - s);
    }
    return g;
  };
  return hc;
}

DetectionScore detection_f1(VecView x, const std::vector<bool>& mask) {
  if (x.size() != mask.size()) throw Error(ErrorKind::Config, "detection_f1: length mismatch");
  std::size_t tp = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool flagged = x[i] <= 0.0;
    predicted += flagged;
    actual += mask[i];
    tp += flagged && mask[i];
  }
  DetectionScore s;
  s.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  s.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace bvfim
