#include "ncache/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ncache/errors.hpp"
#include "ncache/evaluate.hpp"
#include "ncache/neural_cache.hpp"
#include "ncache/softmax.hpp"

namespace ncache {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

// -log p(target) for one position given the window statistics.
// log_all / log_match: log of the summed cache weights exp(theta s) over the
// whole window and over entries whose value is the target (-inf if none).
double cell_nll(BlendMode mode, double mix, std::size_t window, double target_logit, double log_normalizer,
                double log_all, double log_match) {
  if (mode == BlendMode::linear) {
    const double p_vocab = std::exp(target_logit - log_normalizer);
    if (window == 0) return -std::log(p_vocab);
    const double p_cache = log_match == kNegInf ? 0.0 : std::exp(log_match - log_all);
    return -std::log((1.0 - mix) * p_vocab + mix * p_cache);
  }
  if (window == 0) return log_normalizer - target_logit;
  const double num = log_add_exp(target_logit, log_match == kNegInf ? kNegInf : log_match + mix);
  const double den = log_add_exp(log_normalizer, log_all + mix);
  return den - num;
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_of(const std::vector<std::size_t>& sorted, std::size_t value) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

// Accumulated NLL per (capacity, theta, mix) for the neural cache.
std::vector<double> neural_nll(const HiddenTrace& trace, const std::vector<std::size_t>& caps,
                               const std::vector<double>& thetas, const std::vector<double>& mixes,
                               BlendMode mode, bool reset_on_eos) {
  const std::size_t nc = caps.size();
  const std::size_t nt = thetas.size();
  const std::size_t nm = mixes.size();
  std::vector<double> nll(nc * nt * nm, 0.0);
  const std::size_t cmax = caps.back();
  const std::size_t dim = trace.dim;

  Eigen::ArrayXd dots(static_cast<Eigen::Index>(std::min(cmax, trace.positions()) + 1));
  Eigen::ArrayXd weights(dots.size());
  std::vector<std::size_t> matches;
  std::vector<double> log_all(nc), log_match(nc);
  std::vector<std::size_t> window(nc);

  std::size_t reset_start = 0;
  for (std::size_t t = 0; t < trace.positions(); ++t) {
    if (reset_on_eos && trace.inputs[t] == trace.eos_id) reset_start = t;
    const std::size_t lo = std::max(reset_start, t >= cmax ? t - cmax : std::size_t{0});
    const std::size_t len = t - lo;
    const TokenId target = trace.targets[t];

    // Newest entry first: k = 0 is position t - 1.
    matches.clear();
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t j = t - 1 - k;
      dots(static_cast<Eigen::Index>(k)) = dot_f64(trace.query(t), trace.query(j), dim);
      if (trace.targets[j] == target) matches.push_back(k);
    }
    for (std::size_t c = 0; c < nc; ++c) window[c] = std::min(caps[c], len);

    for (std::size_t ti = 0; ti < nt; ++ti) {
      if (len > 0) {
        const double theta = thetas[ti];
        auto head = dots.head(static_cast<Eigen::Index>(len));
        auto w = weights.head(static_cast<Eigen::Index>(len));
        w = theta * head;
        const double m = w.maxCoeff();
        w = (w - m).exp();
        double all = 0.0;
        double match = 0.0;
        std::size_t done = 0;
        std::size_t mi = 0;
        for (std::size_t c = 0; c < nc; ++c) {
          const std::size_t n = window[c];
          all += w.segment(static_cast<Eigen::Index>(done), static_cast<Eigen::Index>(n - done)).sum();
          while (mi < matches.size() && matches[mi] < n) match += w(static_cast<Eigen::Index>(matches[mi++]));
          done = n;
          if (all > 1e-290) {
            log_all[c] = std::log(all) + m;
            log_match[c] = match > 0.0 ? std::log(match) + m : kNegInf;
          } else {
            // Every entry of this shorter window is far below the long
            // window's max; renormalize against its own max.
            const auto l = (theta * head.head(static_cast<Eigen::Index>(n))).eval();
            const double mc = l.maxCoeff();
            const Eigen::ArrayXd wc = (l - mc).exp();
            double mw = 0.0;
            for (std::size_t k : matches) {
              if (k < n) mw += wc(static_cast<Eigen::Index>(k));
            }
            log_all[c] = std::log(wc.sum()) + mc;
            log_match[c] = mw > 0.0 ? std::log(mw) + mc : kNegInf;
          }
        }
      }
      for (std::size_t c = 0; c < nc; ++c) {
        double* row = nll.data() + (c * nt + ti) * nm;
        for (std::size_t k = 0; k < nm; ++k) {
          row[k] += cell_nll(mode, mixes[k], window[c], trace.target_logit[t], trace.log_normalizer[t],
                             len > 0 ? log_all[c] : kNegInf, len > 0 ? log_match[c] : kNegInf);
        }
      }
    }
  }
  return nll;
}

// Accumulated NLL per (capacity, mix) for the count-based unigram cache.
std::vector<double> unigram_nll(const HiddenTrace& trace, const std::vector<std::size_t>& caps,
                                const std::vector<double>& mixes, BlendMode mode, bool reset_on_eos) {
  const std::size_t nm = mixes.size();
  std::vector<double> nll(caps.size() * nm, 0.0);
  TokenId max_id = 0;
  for (TokenId id : trace.targets) max_id = std::max(max_id, id);
  for (std::size_t c = 0; c < caps.size(); ++c) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_id) + 1, 0);
    std::size_t lo = 0;
    for (std::size_t t = 0; t < trace.positions(); ++t) {
      if (reset_on_eos && trace.inputs[t] == trace.eos_id) {
        for (; lo < t; ++lo) --counts[static_cast<std::size_t>(trace.targets[lo])];
      }
      const std::size_t len = t - lo;
      const std::size_t hits = counts[static_cast<std::size_t>(trace.targets[t])];
      const double log_all = len > 0 ? std::log(static_cast<double>(len)) : kNegInf;
      const double log_match = hits > 0 ? std::log(static_cast<double>(hits)) : kNegInf;
      for (std::size_t k = 0; k < nm; ++k) {
        nll[c * nm + k] += cell_nll(mode, mixes[k], len, trace.target_logit[t], trace.log_normalizer[t],
                                    log_all, log_match);
      }
      ++counts[static_cast<std::size_t>(trace.targets[t])];
      if (t + 1 - lo > caps[c]) --counts[static_cast<std::size_t>(trace.targets[lo++])];
    }
  }
  return nll;
}

double to_perplexity(double nll, std::size_t n) { return std::exp(nll / static_cast<double>(n)); }

SweepRow pick_best(const std::vector<SweepRow>& rows) {
  SweepRow best = rows.front();
  for (const auto& r : rows) {
    if (better_row(r, best)) best = r;
  }
  return best;
}

}  // namespace

void SweepSpec::validate() const {
  if (theta_grid.empty() || mix_grid.empty() || capacity_grid.empty()) {
    throw ConfigError("sweep grids must be nonempty");
  }
  for (double th : theta_grid) {
    if (!std::isfinite(th) || th < 0.0) throw ConfigError("theta grid values must be finite and >= 0");
  }
  for (double m : mix_grid) {
    if (mode == BlendMode::linear && !(m >= 0.0 && m <= 1.0)) throw ConfigError("lambda grid must lie in [0, 1]");
    if (mode == BlendMode::global && std::isnan(m)) throw ConfigError("alpha grid values must be numbers");
  }
  for (std::size_t c : capacity_grid) {
    if (c < 1) throw ConfigError("cache capacities must be >= 1");
  }
}

SweepSpec SweepSpec::defaults(BlendMode mode) {
  SweepSpec s;
  s.mode = mode;
  s.theta_grid = linspace(0.0, 1.0, 11);
  s.mix_grid = mode == BlendMode::linear ? linspace(0.0, 0.5, 11) : std::vector<double>{-2, -1, 0, 1, 2};
  s.capacity_grid = {50, 100, 200, 500, 1000, 2000, 5000, 10000};
  return s;
}

double HiddenTrace::base_perplexity() const {
  double nll = 0.0;
  for (std::size_t t = 0; t < positions(); ++t) nll += log_normalizer[t] - target_logit[t];
  return to_perplexity(nll, positions());
}

HiddenTrace trace_stream(const LanguageModel& model, const TokenStream& stream) {
  model.config.validate();
  check_compatible(model, stream);
  if (stream.size() < 2) throw std::invalid_argument("trace_stream: stream needs at least two tokens");
  HiddenTrace trace;
  trace.dim = static_cast<std::size_t>(model.config.hidden_dim);
  trace.eos_id = stream.eos_id;
  const std::size_t n = stream.size() - 1;
  trace.queries.resize(n * trace.dim);
  trace.targets.resize(n);
  trace.inputs.resize(n);
  trace.target_logit.resize(n);
  trace.log_normalizer.resize(n);
  HiddenState state = HiddenState::zeros(model.config);
  for (std::size_t t = 0; t < n; ++t) {
    trace.inputs[t] = stream.ids[t];
    trace.targets[t] = stream.ids[t + 1];
    state = rnn_step(stream.ids[t], state, model.params, model.config);
    float* q = trace.queries.data() + t * trace.dim;
    for (std::size_t i = 0; i < trace.dim; ++i) q[i] = static_cast<float>(state.h(static_cast<Eigen::Index>(i)));
    const Eigen::VectorXd logits = vocab_logits(state.h, model.params);
    trace.target_logit[t] = logits(trace.targets[t]);
    trace.log_normalizer[t] = log_sum_exp(logits);
  }
  return trace;
}

bool better_row(const SweepRow& a, const SweepRow& b) {
  if (a.perplexity != b.perplexity) return a.perplexity < b.perplexity;
  if (a.mix != b.mix) return a.mix < b.mix;
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.capacity < b.capacity;
}

SweepResult sweep(const HiddenTrace& trace, const SweepSpec& spec) {
  spec.validate();
  if (trace.positions() == 0) throw std::invalid_argument("sweep: empty trace");
  const auto caps = sorted_unique(spec.capacity_grid);
  const auto nll = neural_nll(trace, caps, spec.theta_grid, spec.mix_grid, spec.mode, spec.reset_on_eos);
  const std::size_t nt = spec.theta_grid.size();
  const std::size_t nm = spec.mix_grid.size();

  SweepResult result;
  result.base_perplexity = trace.base_perplexity();
  for (std::size_t cap : spec.capacity_grid) {
    const std::size_t c = index_of(caps, cap);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t k = 0; k < nm; ++k) {
        result.rows.push_back({spec.theta_grid[ti], spec.mix_grid[k], cap,
                               to_perplexity(nll[(c * nt + ti) * nm + k], trace.positions())});
      }
    }
  }
  result.best = pick_best(result.rows);
  return result;
}

SweepResult sweep(const LanguageModel& model, const TokenStream& valid, const SweepSpec& spec) {
  spec.validate();
  return sweep(trace_stream(model, valid), spec);
}

SweepResult unigram_sweep(const HiddenTrace& trace, const std::vector<std::size_t>& capacities,
                          const std::vector<double>& mix_grid, BlendMode mode, bool reset_on_eos) {
  SweepSpec spec;
  spec.theta_grid = {0.0};
  spec.mix_grid = mix_grid;
  spec.capacity_grid = capacities;
  spec.mode = mode;
  spec.validate();
  const auto nll = unigram_nll(trace, capacities, mix_grid, mode, reset_on_eos);
  SweepResult result;
  result.base_perplexity = trace.base_perplexity();
  for (std::size_t c = 0; c < capacities.size(); ++c) {
    for (std::size_t k = 0; k < mix_grid.size(); ++k) {
      result.rows.push_back({0.0, mix_grid[k], capacities[c], to_perplexity(nll[c * mix_grid.size() + k], trace.positions())});
    }
  }
  result.best = pick_best(result.rows);
  return result;
}

std::vector<CurvePoint> cache_size_curve(const HiddenTrace& valid, const HiddenTrace& eval, const SweepSpec& spec) {
  spec.validate();
  for (std::size_t i = 1; i < spec.capacity_grid.size(); ++i) {
    if (spec.capacity_grid[i] <= spec.capacity_grid[i - 1]) {
      throw ConfigError("cache_size_curve: sizes must be strictly ascending");
    }
  }
  const bool same = &valid == &eval;
  const SweepResult neural = sweep(valid, spec);
  const SweepResult unigram = unigram_sweep(valid, spec.capacity_grid, spec.mix_grid, spec.mode, spec.reset_on_eos);

  std::vector<CurvePoint> curve;
  for (std::size_t cap : spec.capacity_grid) {
    CurvePoint pt;
    pt.capacity = cap;
    SweepRow nbest{0, 0, 0, std::numeric_limits<double>::infinity()};
    bool first = true;
    for (const auto& r : neural.rows) {
      if (r.capacity == cap && (first || better_row(r, nbest))) {
        nbest = r;
        first = false;
      }
    }
    first = true;
    SweepRow ubest{0, 0, 0, std::numeric_limits<double>::infinity()};
    for (const auto& r : unigram.rows) {
      if (r.capacity == cap && (first || better_row(r, ubest))) {
        ubest = r;
        first = false;
      }
    }
    pt.neural_theta = nbest.theta;
    pt.neural_mix = nbest.mix;
    pt.unigram_mix = ubest.mix;
    if (same) {
      pt.neural_perplexity = nbest.perplexity;
      pt.unigram_perplexity = ubest.perplexity;
    } else {
      SweepSpec one = spec;
      one.theta_grid = {nbest.theta};
      one.mix_grid = {nbest.mix};
      one.capacity_grid = {cap};
      pt.neural_perplexity = sweep(eval, one).rows.front().perplexity;
      pt.unigram_perplexity =
          unigram_sweep(eval, {cap}, {ubest.mix}, spec.mode, spec.reset_on_eos).rows.front().perplexity;
    }
    curve.push_back(pt);
  }
  return curve;
}

std::vector<CurvePoint> cache_size_curve(const LanguageModel& model, const TokenStream& valid,
                                         const TokenStream& eval, const SweepSpec& spec) {
  spec.validate();
  const HiddenTrace valid_trace = trace_stream(model, valid);
  if (&valid == &eval) return cache_size_curve(valid_trace, valid_trace, spec);
  const HiddenTrace eval_trace = trace_stream(model, eval);
  return cache_size_curve(valid_trace, eval_trace, spec);
}

void write_sweep_tsv(std::ostream& out, const SweepResult& result) {
  const auto old = out.precision(12);
  out << "theta\tmix\tcapacity\tppl\n";
  for (const auto& r : result.rows) out << r.theta << '\t' << r.mix << '\t' << r.capacity << '\t' << r.perplexity << '\n';
  out.precision(old);
}

void write_curve_tsv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  const auto old = out.precision(12);
  out << "capacity\tneural_ppl\tneural_theta\tneural_mix\tunigram_ppl\tunigram_mix\n";
  for (const auto& p : curve) {
    out << p.capacity << '\t' << p.neural_perplexity << '\t' << p.neural_theta << '\t' << p.neural_mix << '\t'
        << p.unigram_perplexity << '\t' << p.unigram_mix << '\n';
  }
  out.precision(old);
}

}  // namespace ncache
