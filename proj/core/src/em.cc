/*
 * Copyright 2026 The wcprank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "wcprank/labeling.h"
#include "wcprank/parallel.h"

namespace wcprank::labeling {
namespace {

constexpr std::size_t kChunkSize = 8192;

// Neumaier compensated sum.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void Add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  void Add(const KahanSum& other) {
    Add(other.sum);
    Add(other.carry);
  }
  double Value() const { return sum + carry; }
};

struct ComponentStats {
  KahanSum weight;
  KahanSum x;
  KahanSum xx;
  KahanSum log_x;
  KahanSum log_1mx;
};

// Plain per-chunk sums; chunks are combined with compensation.
struct ChunkStats {
  double weight = 0.0;
  double x = 0.0;
  double xx = 0.0;
  double log_x = 0.0;
  double log_1mx = 0.0;
};

struct EStepResult {
  KahanSum log_likelihood;
  std::vector<ComponentStats> components;
};

struct Samples {
  std::vector<double> x;
  std::vector<double> log_x;
  std::vector<double> log_1mx;
};

double LogBetaNorm(double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

// Expected complete-data log-likelihood of one component as a function of
// its shape parameters, from responsibility-weighted sufficient statistics.
double ComponentObjective(double a, double b, double w, double sl, double sl1) {
  return w * LogBetaNorm(a, b) + (a - 1.0) * sl + (b - 1.0) * sl1;
}

void MomentMatch(double mean, double var, const EmConfig& config, double* a,
                 double* b) {
  mean = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  double concentration = 2.0 * config.shape_max;
  if (var > 0.0) {
    const double c = mean * (1.0 - mean) / var - 1.0;
    if (c > 0.0) concentration = c;
  }
  *a = std::clamp(mean * concentration, config.shape_min, config.shape_max);
  *b = std::clamp((1.0 - mean) * concentration, config.shape_min,
                  config.shape_max);
}

// Maximizes the concave component objective over the shape box, starting from
// the better of the moment estimate and the current parameters. Returns the
// current parameters unchanged if no improvement is found.
void UpdateShapes(double w, double sl, double sl1, double mom_a, double mom_b,
                  const EmConfig& config, double* a, double* b) {
  const auto f = [&](double x, double y) {
    return ComponentObjective(x, y, w, sl, sl1);
  };
  const auto project = [&](double v) {
    return std::clamp(v, config.shape_min, config.shape_max);
  };
  const double f_old = f(*a, *b);
  double x = *a;
  double y = *b;
  double fx = f_old;
  if (const double f_mom = f(mom_a, mom_b); f_mom > fx) {
    x = mom_a;
    y = mom_b;
    fx = f_mom;
  }
  for (int iter = 0; iter < 50; ++iter) {
    const double psi_ab = boost::math::digamma(x + y);
    const double tri_ab = boost::math::trigamma(x + y);
    const double ga = w * (psi_ab - boost::math::digamma(x)) + sl;
    const double gb = w * (psi_ab - boost::math::digamma(y)) + sl1;
    const double haa = w * (tri_ab - boost::math::trigamma(x));
    const double hbb = w * (tri_ab - boost::math::trigamma(y));
    const double hab = w * tri_ab;
    const double det = haa * hbb - hab * hab;
    double da, db;
    if (det > 0.0 && haa < 0.0) {
      da = -(hbb * ga - hab * gb) / det;
      db = -(haa * gb - hab * ga) / det;
    } else {
      // Fall back to a scaled gradient step.
      const double scale = 1.0 / (std::abs(haa) + std::abs(hbb) + 1e-300);
      da = ga * scale;
      db = gb * scale;
    }
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const double nx = project(x + t * da);
      const double ny = project(y + t * db);
      const double fn = f(nx, ny);
      if (fn > fx) {
        const double moved = std::abs(nx - x) + std::abs(ny - y);
        x = nx;
        y = ny;
        fx = fn;
        improved = moved > 1e-12 * (x + y);
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  if (fx >= f_old) {
    *a = x;
    *b = y;
  }
}

Samples Prepare(std::span<const double> scores, double delta) {
  Samples s;
  s.x = ClipScores(scores, delta);
  s.log_x.resize(s.x.size());
  s.log_1mx.resize(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    s.log_x[i] = std::log(s.x[i]);
    s.log_1mx[i] = std::log1p(-s.x[i]);
  }
  return s;
}

EStepResult EStep(const Samples& s, const EmModel& m, int threads) {
  const int k = m.k;
  std::vector<double> log_pi(k);
  std::vector<double> norm(k);
  for (int c = 0; c < k; ++c) {
    log_pi[c] = m.pi[c] > 0.0 ? std::log(m.pi[c])
                              : -std::numeric_limits<double>::infinity();
    norm[c] = LogBetaNorm(m.alpha[c], m.beta[c]);
  }
  const std::size_t n = s.x.size();
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<EStepResult> partial(chunks);

  ParallelFor(chunks, threads, [&](std::size_t chunk) {
    EStepResult& out = partial[chunk];
    out.components.resize(k);
    std::vector<ChunkStats> stats(k);
    std::vector<double> lp(k);
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t i = chunk * kChunkSize; i < end; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        lp[c] = log_pi[c] + norm[c] + (m.alpha[c] - 1.0) * s.log_x[i] +
                (m.beta[c] - 1.0) * s.log_1mx[i];
        top = std::max(top, lp[c]);
      }
      double total = 0.0;
      for (int c = 0; c < k; ++c) {
        lp[c] = std::exp(lp[c] - top);
        total += lp[c];
      }
      out.log_likelihood.Add(top + std::log(total));
      const double inv = 1.0 / total;
      for (int c = 0; c < k; ++c) {
        const double g = lp[c] * inv;
        auto& st = stats[c];
        st.weight += g;
        st.x += g * s.x[i];
        st.xx += g * s.x[i] * s.x[i];
        st.log_x += g * s.log_x[i];
        st.log_1mx += g * s.log_1mx[i];
      }
    }
    for (int c = 0; c < k; ++c) {
      auto& st = out.components[c];
      st.weight.Add(stats[c].weight);
      st.x.Add(stats[c].x);
      st.xx.Add(stats[c].xx);
      st.log_x.Add(stats[c].log_x);
      st.log_1mx.Add(stats[c].log_1mx);
    }
  });

  EStepResult result;
  result.components.resize(k);
  for (const auto& p : partial) {
    result.log_likelihood.Add(p.log_likelihood);
    for (int c = 0; c < k; ++c) {
      result.components[c].weight.Add(p.components[c].weight);
      result.components[c].x.Add(p.components[c].x);
      result.components[c].xx.Add(p.components[c].xx);
      result.components[c].log_x.Add(p.components[c].log_x);
      result.components[c].log_1mx.Add(p.components[c].log_1mx);
    }
  }
  return result;
}

void MStep(const EStepResult& e, std::size_t n, const EmConfig& config,
           EmModel* m) {
  for (int c = 0; c < m->k; ++c) {
    const auto& st = e.components[c];
    const double w = st.weight.Value();
    m->pi[c] = w / static_cast<double>(n);
    if (w <= 1e-12 * static_cast<double>(n)) continue;
    const double mean = st.x.Value() / w;
    const double var = std::max(0.0, st.xx.Value() / w - mean * mean);
    double mom_a, mom_b;
    MomentMatch(mean, var, config, &mom_a, &mom_b);
    if (config.m_step == MStepMethod::kMoments) {
      m->alpha[c] = mom_a;
      m->beta[c] = mom_b;
      continue;
    }
    if (config.m_step == MStepMethod::kGuardedMoments) {
      const double sl = st.log_x.Value();
      const double sl1 = st.log_1mx.Value();
      if (ComponentObjective(mom_a, mom_b, w, sl, sl1) >=
          ComponentObjective(m->alpha[c], m->beta[c], w, sl, sl1)) {
        m->alpha[c] = mom_a;
        m->beta[c] = mom_b;
      }
      continue;
    }
    UpdateShapes(w, st.log_x.Value(), st.log_1mx.Value(), mom_a, mom_b, config,
                 &m->alpha[c], &m->beta[c]);
  }
  double total = 0.0;
  for (double p : m->pi) total += p;
  for (double& p : m->pi) p /= total;
}

EmModel Initialize(const Samples& s, int k, const EmConfig& config) {
  EmModel m;
  m.k = k;
  m.pi.assign(k, 1.0 / k);
  m.alpha.resize(k);
  m.beta.resize(k);

  std::vector<double> sorted = s.x;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> centers(k);
  for (int c = 0; c < k; ++c) {
    const double q = (c + 0.5) / k;
    centers[c] = sorted[std::min(n - 1, static_cast<std::size_t>(q * n))];
  }

  double global_mean = 0.0;
  for (double v : sorted) global_mean += v;
  global_mean /= static_cast<double>(n);
  double global_var = 0.0;
  for (double v : sorted) global_var += (v - global_mean) * (v - global_mean);
  global_var /= static_cast<double>(n);

  // One hard assignment to the nearest center seeds each component's shape.
  std::vector<double> sum(k, 0.0), sum_sq(k, 0.0), count(k, 0.0);
  for (double v : sorted) {
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (std::abs(v - centers[c]) < std::abs(v - centers[best])) best = c;
    }
    sum[best] += v;
    sum_sq[best] += v * v;
    count[best] += 1.0;
  }
  for (int c = 0; c < k; ++c) {
    double mean = centers[c];
    double var = global_var / (k * k);
    if (count[c] >= 2.0) {
      mean = sum[c] / count[c];
      var = std::max(0.0, sum_sq[c] / count[c] - mean * mean);
    }
    MomentMatch(mean, var, config, &m.alpha[c], &m.beta[c]);
  }
  return m;
}

}  // namespace

std::string MStepName(MStepMethod method) {
  switch (method) {
    case MStepMethod::kMoments:
      return "moments";
    case MStepMethod::kGuardedMoments:
      return "guarded_moments";
    case MStepMethod::kGuardedNewton:
      return "guarded_newton";
  }
  return "";
}

MStepMethod ParseMStep(const std::string& name) {
  for (auto m : {MStepMethod::kMoments, MStepMethod::kGuardedMoments,
                 MStepMethod::kGuardedNewton}) {
    if (MStepName(m) == name) return m;
  }
  throw ContractError("unknown EM M-step method: " + name);
}

double BetaLogPdf(double x, double a, double b) {
  return LogBetaNorm(a, b) + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

std::vector<double> ClipScores(std::span<const double> scores, double delta) {
  std::vector<double> out(scores.begin(), scores.end());
  for (double& v : out) v = std::clamp(v, delta, 1.0 - delta);
  return out;
}

double EmModel::LogDensity(double score) const {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(k);
  for (int c = 0; c < k; ++c) {
    lp[c] = pi[c] > 0.0 ? std::log(pi[c]) + BetaLogPdf(score, alpha[c], beta[c])
                        : -std::numeric_limits<double>::infinity();
    top = std::max(top, lp[c]);
  }
  double total = 0.0;
  for (double v : lp) total += std::exp(v - top);
  return top + std::log(total);
}

std::vector<double> EmModel::Responsibilities(double score) const {
  std::vector<double> g(k);
  double top = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    g[c] = pi[c] > 0.0 ? std::log(pi[c]) + BetaLogPdf(score, alpha[c], beta[c])
                       : -std::numeric_limits<double>::infinity();
    top = std::max(top, g[c]);
  }
  double total = 0.0;
  for (double& v : g) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : g) v /= total;
  return g;
}

EmModel EmFit(std::span<const double> scores, int k, const EmConfig& config) {
  Require(k >= 1, "EmFit: K must be >= 1");
  Require(scores.size() >= static_cast<std::size_t>(10 * k),
          "EmFit: need at least 10*K scores");
  Require(config.clip_delta > 0.0 && config.clip_delta < 0.5,
          "EmFit: clip delta must lie in (0, 0.5)");

  const Samples s = Prepare(scores, config.clip_delta);
  EmModel m = Initialize(s, k, config);

  double previous = 0.0;
  for (int iter = 0;; ++iter) {
    const EStepResult e = EStep(s, m, config.threads);
    const double ll = e.log_likelihood.Value();
    m.log_likelihood_trace.push_back(ll);
    m.log_likelihood = ll;
    if (iter > 0 && std::abs(ll - previous) < config.tolerance) break;
    if (iter >= config.max_iterations) break;
    previous = ll;
    MStep(e, s.x.size(), config, &m);
    m.iterations = iter + 1;
  }
  return m;
}

double Bic(const EmModel& model, std::size_t n) {
  return -2.0 * model.log_likelihood +
         (3.0 * model.k - 1.0) * std::log(static_cast<double>(n));
}

EmModel SelectModel(std::span<const double> scores, const EmConfig& config) {
  Require(config.k_min >= 1 && config.k_min <= config.k_max,
          "SelectModel: invalid K range");
  EmModel best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = config.k_min; k <= config.k_max; ++k) {
    if (scores.size() < static_cast<std::size_t>(10 * k)) break;
    EmModel m = EmFit(scores, k, config);
    const double bic = Bic(m, scores.size());
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(m);
    }
  }
  Require(best.k > 0, "SelectModel: not enough scores for any K in range");
  return best;
}

int SelectK(std::span<const double> scores, const EmConfig& config) {
  return SelectModel(scores, config).k;
}

SoftRelevance EmSmooth(const EmModel& model, std::span<const double> scores,
                       const EmConfig& config) {
  Require(model.k >= 1, "EmSmooth: model is not fitted");
  SoftRelevance out;
  const auto clipped = ClipScores(scores, config.clip_delta);
  out.smoothed.resize(clipped.size());
  double total = 0.0;
  for (std::size_t j = 0; j < clipped.size(); ++j) {
    const auto gamma = model.Responsibilities(clipped[j]);
    double r_hat = 0.0;
    for (int c = 0; c < model.k; ++c) r_hat += gamma[c] * model.Mean(c);
    out.smoothed[j] = r_hat;
    total += r_hat;
  }
  out.soft.resize(clipped.size());
  for (std::size_t j = 0; j < clipped.size(); ++j) {
    out.soft[j] = out.smoothed[j] / total;
  }
  return out;
}

}  // namespace wcprank::labeling
