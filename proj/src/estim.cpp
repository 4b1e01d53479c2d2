#include "lfm/estim.hpp"

#include "lfm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lfm::estim {

ParamSpace::ParamSpace(std::vector<Parameter> params) {
  for (auto& p : params) add(std::move(p));
}

void ParamSpace::add(std::string name, double lower, double upper) {
  add(Parameter{std::move(name), lower, upper, lower >= 0.0 ? Transform::Log : Transform::Identity});
}

void ParamSpace::add(Parameter p) {
  if (!(p.lower < p.upper)) throw ConfigError("parameter '" + p.name + "' has empty bounds");
  if (p.transform == Transform::Log && p.lower < 0.0) {
    throw ConfigError("log-transformed parameter '" + p.name + "' needs a non-negative lower bound");
  }
  params_.push_back(std::move(p));
}

std::vector<std::string> ParamSpace::names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

Vec ParamSpace::to_unconstrained(const Vec& natural) const {
  Vec z(natural.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    z(k) = params_[i].transform == Transform::Log ? std::log(natural(k)) : natural(k);
  }
  return z;
}

Vec ParamSpace::to_natural(const Vec& z) const {
  Vec x(z.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    x(k) = params_[i].transform == Transform::Log ? std::exp(z(k)) : z(k);
  }
  return x;
}

bool ParamSpace::contains(const Vec& natural) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double v = natural(static_cast<Eigen::Index>(i));
    if (!(v >= params_[i].lower && v <= params_[i].upper)) return false;
  }
  return true;
}

Vec ParamSpace::clamp(const Vec& natural) const {
  Vec x = natural;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    x(k) = std::clamp(x(k), params_[i].lower, params_[i].upper);
  }
  return x;
}

namespace {

struct Evaluator {
  const Objective& objective;
  const ParamSpace& space;
  MaximizeResult& result;

  // Value at an unconstrained point; out-of-bounds points are penalized by their distance.
  double operator()(const Vec& z) {
    const Vec x = space.to_natural(z);
    const Vec xc = space.clamp(x);
    double value = objective(xc);
    if (std::isnan(value)) value = -std::numeric_limits<double>::infinity();
    ++result.evaluations;
    if (value > result.value) {
      result.value = value;
      result.theta = xc;
    }
    result.best_trace.push_back(result.value);
    const double distance = (space.to_unconstrained(xc) - z).norm();
    if (distance > 0.0 && std::isfinite(value)) value -= 1e3 * (1.0 + std::abs(value)) * distance;
    return value;
  }
};

bool nelder_mead(Evaluator& eval, const Vec& z0, const MaximizeOptions& opt) {
  const Eigen::Index n = z0.size();
  std::vector<Vec> simplex(static_cast<std::size_t>(n + 1), z0);
  std::vector<double> f(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
  const int start = eval.result.evaluations;
  for (std::size_t i = 0; i < simplex.size(); ++i) f[i] = eval(simplex[i]);

  // Maximization: order by decreasing value.
  std::vector<std::size_t> order(simplex.size());
  while (eval.result.evaluations - start < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double fa = std::isnan(f[a]) ? -INFINITY : f[a];
      const double fb = std::isnan(f[b]) ? -INFINITY : f[b];
      return fa > fb;
    });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (std::isfinite(f[best]) && std::isfinite(f[worst]) &&
        std::abs(f[best] - f[worst]) <= opt.tolerance * (1.0 + std::abs(f[best]))) {
      double spread = 0.0;
      for (const auto& p : simplex) spread = std::max(spread, (p - simplex[best]).cwiseAbs().maxCoeff());
      if (spread < 1e-6) return true;
    }

    Vec centroid = Vec::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(n);

    const Vec reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr > f[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe > fr) {
        simplex[worst] = expanded;
        f[worst] = fe;
      } else {
        simplex[worst] = reflected;
        f[worst] = fr;
      }
      continue;
    }
    if (fr > f[second_worst]) {
      simplex[worst] = reflected;
      f[worst] = fr;
      continue;
    }
    const bool outside = fr > f[worst];
    const Vec contracted = outside ? Vec(centroid + 0.5 * (reflected - centroid))
                                   : Vec(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc > (outside ? fr : f[worst])) {
      simplex[worst] = contracted;
      f[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      f[i] = eval(simplex[i]);
    }
  }
  return false;
}

bool touches_bound(const ParamSpace& space, const Vec& x) {
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double v = x(static_cast<Eigen::Index>(i));
    const auto& p = space.params()[i];
    const double tol = 1e-9 * std::max(1.0, std::abs(v));
    if (std::abs(v - p.lower) <= tol || std::abs(v - p.upper) <= tol) return true;
  }
  return false;
}

}  // namespace

MaximizeResult maximize(const Objective& objective, const ParamSpace& space, const Vec& theta0,
                        const MaximizeOptions& options) {
  if (theta0.size() != static_cast<Eigen::Index>(space.size())) {
    throw DimensionError("initial parameter vector does not match the parameter space");
  }
  if (!space.contains(theta0)) throw ConfigError("initial parameters lie outside the bounds");

  MaximizeResult result;
  result.theta = theta0;
  Evaluator eval{objective, space, result};
  const Vec z0 = space.to_unconstrained(theta0);
  bool converged = nelder_mead(eval, z0, options);

  Rng rng(derive_seed(options.seed, 0));
  std::normal_distribution<double> normal;
  for (int r = 0; r < options.restarts; ++r) {
    Vec z = z0;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += options.jitter * normal(rng);
    converged = nelder_mead(eval, z, options) && converged;
  }
  // Polish from the best point found.
  converged = nelder_mead(eval, space.to_unconstrained(result.theta), options) && converged;

  result.converged = converged;
  result.on_boundary = touches_bound(space, result.theta);
  return result;
}

Vec McmcChain::mean(double burn_in_fraction) const {
  const auto skip = static_cast<Eigen::Index>(burn_in_fraction * natural.rows());
  return natural.bottomRows(natural.rows() - skip).colwise().mean().transpose();
}

Vec McmcChain::stddev(double burn_in_fraction) const {
  const auto skip = static_cast<Eigen::Index>(burn_in_fraction * natural.rows());
  const Mat kept = natural.bottomRows(natural.rows() - skip);
  const RowVec mu = kept.colwise().mean();
  const Mat centered = kept.rowwise() - mu;
  const double denom = std::max<double>(1.0, static_cast<double>(kept.rows() - 1));
  return (centered.array().square().colwise().sum() / denom).sqrt().transpose();
}

McmcChain rw_metropolis(const Objective& logpost, const ParamSpace& space, const Vec& theta0,
                        int n_samples, const Vec& step_scales, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(space.size());
  if (theta0.size() != dim || step_scales.size() != dim) {
    throw DimensionError("MCMC dimension mismatch");
  }
  if (n_samples < 1) throw ConfigError("MCMC needs at least one sample");

  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vec z = space.to_unconstrained(theta0);
  double lp = logpost(theta0);
  if (!std::isfinite(lp)) throw ConfigError("MCMC start point has non-finite log posterior");

  McmcChain chain;
  chain.seed = seed;
  chain.unconstrained.resize(n_samples, dim);
  chain.natural.resize(n_samples, dim);
  chain.logpost.resize(n_samples);
  int accepted = 0;
  for (int i = 0; i < n_samples; ++i) {
    Vec proposal = z;
    for (Eigen::Index k = 0; k < dim; ++k) proposal(k) += step_scales(k) * normal(rng);
    const Vec x = space.to_natural(proposal);
    const double lp_new = space.contains(x) ? logpost(x) : -std::numeric_limits<double>::infinity();
    const double u = uniform(rng);
    if (std::isfinite(lp_new) && std::log(u) < lp_new - lp) {
      z = proposal;
      lp = lp_new;
      ++accepted;
    }
    chain.unconstrained.row(i) = z.transpose();
    chain.natural.row(i) = space.to_natural(z).transpose();
    chain.logpost(i) = lp;
  }
  chain.acceptance_rate = static_cast<double>(accepted) / n_samples;
  return chain;
}

}  // namespace lfm::estim
