#include "chaingap/sde_sim.hpp"

#include "chaingap/eigensolver.hpp"
#include "chaingap/parallel.hpp"
#include "chaingap/stationary_state.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace chaingap {

LinearSde make_sde(const ChainConfig& cfg) { return {dynamics_matrix(cfg), noise_factor(cfg)}; }

LinearSde frictionless_sde(const ChainConfig& cfg) {
  RealMatrix K = dynamics_matrix(cfg);
  const int comps = is_planar(cfg) ? 2 : 1;
  for (int s : frictional_sites(cfg))
    for (int c = 0; c < comps; ++c) K(comps * s + c, comps * s + c) = 0.0;
  return {K, RealMatrix::Zero(K.rows(), 0)};
}

// ------ counter-based normals ------

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_open(std::uint64_t key) { return (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53; }

RealMatrix psd_sqrt_factor(const RealMatrix& S) {
  const auto es = dense_symmetric(0.5 * (S + S.transpose()));
  const RealVector d = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * d.asDiagonal();
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t traj, std::uint64_t step, std::uint64_t comp) {
  const std::uint64_t key = mix(seed ^ mix(traj ^ mix(step ^ mix(comp))));
  const double u1 = uniform_open(mix(key ^ 0x5851f42d4c957f2dULL));
  const double u2 = uniform_open(mix(key ^ 0x14057b7ef767814fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

RealMatrix propagator(const RealMatrix& K, double t) { return RealMatrix((-t * K).exp()); }

RealVector euler_path(const RealMatrix& K, RealVector x0, double dt, long steps) {
  RealVector kx(x0.size());
  for (long s = 0; s < steps; ++s) {
    kx.noalias() = K * x0;
    x0 -= dt * kx;
  }
  return x0;
}

// ------ simulation ------

SimStats simulate(const SimSpec& spec) {
  validate(spec.cfg);
  return simulate(make_sde(spec.cfg), spec.options);
}

SimStats simulate(const LinearSde& sde, const SimOptions& opt, const RealMatrix* stationary) {
  const RealMatrix& K = sde.drift;
  const RealMatrix& D = sde.noise;
  const Eigen::Index d = K.rows();
  if (!(opt.dt > 0) || opt.n_steps < 1 || opt.n_traj < 1 || opt.burn_in < 0 || opt.burn_in >= opt.n_steps ||
      opt.sample_every < 1 || opt.observe_every < 1)
    throw PreconditionError("simulate: invalid step, trajectory or sampling settings");
  if (opt.initial == InitialKind::Custom && opt.custom_initial.size() != d)
    throw PreconditionError("simulate: custom initial state has wrong dimension");
  if (opt.observable.size() != 0 && opt.observable.size() != d)
    throw PreconditionError("simulate: observable has wrong dimension");

  SimStats out;
  const double knorm = d ? K.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  if (opt.dt * knorm >= 0.5) throw PreconditionError("simulate: dt * |M| >= 0.5, step too large");
  if (opt.dt * knorm > 0.1) out.warnings.push_back("dt * |M| = " + std::to_string(opt.dt * knorm) + " exceeds 0.1");

  RealMatrix S;
  if (opt.initial == InitialKind::GaussianFromS || opt.exact_ou) {
    S = stationary ? *stationary : lyapunov_solve(K, D * D.transpose());
  }
  const RealMatrix s_root = opt.initial == InitialKind::GaussianFromS ? psd_sqrt_factor(S) : RealMatrix();
  RealMatrix E, L;
  if (opt.exact_ou) {
    E = propagator(K, opt.dt);
    L = psd_sqrt_factor(S - E * S * E.transpose());
  }
  const Eigen::Index r = opt.exact_ou ? L.cols() : D.cols();
  const double sq = std::sqrt(opt.dt);

  const long n_samples = (opt.n_steps - opt.burn_in) / opt.sample_every;
  const bool observe = opt.observable.size() == d && d > 0;
  const long n_obs = observe ? opt.n_steps / opt.observe_every + 1 : 0;

  struct Partial {
    RealVector mean;
    RealMatrix comoment;
    std::vector<double> obs;
  };
  std::vector<Partial> parts(opt.n_traj);

  parallel_for(opt.n_traj, opt.threads, [&](int traj) {
    Partial p{RealVector::Zero(d), RealMatrix::Zero(d, d), {}};
    RealVector x = RealVector::Zero(d);
    RealVector xi(r), kx(d), nz(d), delta(d);
    if (opt.initial == InitialKind::Custom) x = opt.custom_initial;
    if (opt.initial == InitialKind::GaussianFromS) {
      RealVector g(d);
      for (Eigen::Index j = 0; j < d; ++j) g(j) = counter_normal(opt.seed, traj, ~0ULL, j);
      x = s_root * g;
    }
    if (observe) {
      p.obs.reserve(n_obs);
      p.obs.push_back(opt.observable.dot(x));
    }
    long count = 0;
    for (long step = 1; step <= opt.n_steps; ++step) {
      for (Eigen::Index j = 0; j < r; ++j) xi(j) = counter_normal(opt.seed, traj, step, j);
      if (opt.exact_ou) {
        kx.noalias() = E * x;
        x = kx;
        if (r) x.noalias() += L * xi;
      } else {
        kx.noalias() = K * x;
        x -= opt.dt * kx;
        if (r) {
          nz.noalias() = D * xi;
          x += sq * nz;
        }
      }
      const double nrm = x.squaredNorm();
      if (!std::isfinite(nrm) || nrm > 1e200) throw DivergenceError("simulate: trajectory diverged", step);
      if (step > opt.burn_in && (step - opt.burn_in) % opt.sample_every == 0) {
        ++count;
        delta = x - p.mean;
        p.mean += delta / static_cast<double>(count);
        p.comoment.noalias() += delta * (x - p.mean).transpose();
      }
      if (observe && step % opt.observe_every == 0) p.obs.push_back(opt.observable.dot(x));
      if (traj == 0 && opt.dump_every > 0 && step % opt.dump_every == 0)
        out.dump.push_back({step, step * opt.dt, x});
    }
    parts[traj] = std::move(p);
  });

  out.samples = n_samples;
  out.mean = RealVector::Zero(d);
  for (const auto& p : parts) out.mean += p.mean;
  out.mean /= static_cast<double>(opt.n_traj);
  RealMatrix C = RealMatrix::Zero(d, d);
  for (const auto& p : parts) {
    const RealVector dm = p.mean - out.mean;
    C += p.comoment + static_cast<double>(n_samples) * dm * dm.transpose();
    out.per_traj_second_moment.push_back(p.comoment / static_cast<double>(std::max(n_samples, 1L)) +
                                         p.mean * p.mean.transpose());
  }
  const double total = static_cast<double>(n_samples) * opt.n_traj;
  out.covariance = total > 0 ? RealMatrix(C / total) : C;
  out.second_moment = out.covariance + out.mean * out.mean.transpose();

  if (observe) {
    out.observable_mean = RealVector::Zero(n_obs);
    RealVector sq_sum = RealVector::Zero(n_obs);
    for (const auto& p : parts)
      for (long k = 0; k < n_obs; ++k) {
        out.observable_mean(k) += p.obs[k];
        sq_sum(k) += p.obs[k] * p.obs[k];
      }
    out.observable_mean /= static_cast<double>(opt.n_traj);
    out.observable_se = RealVector::Zero(n_obs);
    if (opt.n_traj > 1)
      for (long k = 0; k < n_obs; ++k) {
        const double var = (sq_sum(k) / opt.n_traj - out.observable_mean(k) * out.observable_mean(k)) *
                           opt.n_traj / (opt.n_traj - 1.0);
        out.observable_se(k) = std::sqrt(std::max(var, 0.0) / opt.n_traj);
      }
    out.observe_times.resize(n_obs);
    for (long k = 0; k < n_obs; ++k) out.observe_times[k] = k * opt.observe_every * opt.dt;
  }
  return out;
}

BootstrapInterval bootstrap_relative_error(const std::vector<RealMatrix>& per_traj, const RealMatrix& ref,
                                           int resamples, std::uint64_t seed) {
  if (per_traj.empty()) throw PreconditionError("bootstrap_relative_error: no trajectories");
  const std::size_t n = per_traj.size();
  auto err = [&](const RealMatrix& m) { return (m - ref).norm() / ref.norm(); };
  RealMatrix avg = RealMatrix::Zero(ref.rows(), ref.cols());
  for (const auto& m : per_traj) avg += m;
  BootstrapInterval out;
  out.estimate = err(avg / static_cast<double>(n));
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> samples(resamples);
  for (int b = 0; b < resamples; ++b) {
    RealMatrix acc = RealMatrix::Zero(ref.rows(), ref.cols());
    for (std::size_t k = 0; k < n; ++k) acc += per_traj[pick(gen)];
    samples[b] = err(acc / static_cast<double>(n));
  }
  std::sort(samples.begin(), samples.end());
  out.lo = samples[static_cast<std::size_t>(0.025 * (resamples - 1))];
  out.hi = samples[static_cast<std::size_t>(0.975 * (resamples - 1))];
  return out;
}

// ------ relaxation ------

RelaxationFit relaxation_fit(const SimSpec& spec, const RealVector& observable) {
  SimOptions opt = spec.options;
  opt.observable = observable;
  if (opt.observe_every <= 1) opt.observe_every = std::max(1L, opt.n_steps / 4000);
  const SimStats st = simulate(make_sde(spec.cfg), opt);
  const RealVector& s = st.observable_mean;
  const RealVector& se = st.observable_se;
  const auto& t = st.observe_times;
  const Eigen::Index n = s.size();
  const double smax = s.cwiseAbs().maxCoeff();
  if (!(smax > 0)) throw FitFailure("relaxation_fit: observable signal is identically zero");

  auto significant = [&](Eigen::Index k) { return std::abs(s(k)) > std::max(4 * se(k), 1e-12 * smax); };
  Eigen::Index end = 0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (significant(k)) end = k + 1;

  // lobes: runs of significant samples sharing a sign
  struct Lobe {
    Eigen::Index first, last, peak;
  };
  std::vector<Lobe> lobes;
  for (Eigen::Index k = 0; k < end; ++k) {
    if (!significant(k)) continue;
    if (lobes.empty() || (s(k) < 0) != (s(lobes.back().peak) < 0)) {
      lobes.push_back({k, k, k});
      continue;
    }
    Lobe& lb = lobes.back();
    lb.last = k;
    if (std::abs(s(k)) > std::abs(s(lb.peak))) lb.peak = k;
  }
  // weak lobes sit near the noise floor, where a missed lobe merges its neighbours
  for (std::size_t j = 1; j < lobes.size(); ++j)
    if (std::abs(s(lobes[j].peak)) < 8 * se(lobes[j].peak)) {
      lobes.resize(j);
      break;
    }
  if (lobes.size() > 1) end = lobes.back().last + 1;
  std::vector<double> crossings;
  for (std::size_t j = 1; j < lobes.size(); ++j) {
    const Eigen::Index lo = lobes[j - 1].last, hi = lobes[j].first;
    double sum = 0;
    int count = 0;
    for (Eigen::Index k = lo + 1; k <= hi; ++k)
      if ((s(k - 1) < 0) != (s(k) < 0)) {
        sum += t[k - 1] + (t[k] - t[k - 1]) * s(k - 1) / (s(k - 1) - s(k));
        ++count;
      }
    crossings.push_back(sum / count);
  }

  std::vector<double> xs, ys;
  const bool oscillating = crossings.size() >= 2;
  if (crossings.size() >= 4) {
    // signed lobe means between consecutive crossings follow the envelope at the lobe centre
    for (std::size_t j = 1; j < crossings.size(); ++j) {
      double sum = 0;
      int count = 0;
      for (Eigen::Index k = 0; k < end; ++k)
        if (t[k] > crossings[j - 1] && t[k] < crossings[j]) sum += s(k), ++count;
      if (count < 3 || sum == 0) continue;
      xs.push_back(0.5 * (crossings[j - 1] + crossings[j]));
      ys.push_back(std::log(std::abs(sum / count)));
    }
  } else if (oscillating) {
    for (const Lobe& lb : lobes) {
      const bool interior = lb.peak > lb.first || lb.first > 0;
      if (!interior || lb.peak == end - 1) continue;
      xs.push_back(t[lb.peak]);
      ys.push_back(std::log(std::abs(s(lb.peak))));
    }
  } else {
    for (Eigen::Index k = 0; k < end; ++k) {
      if (!significant(k)) continue;
      xs.push_back(t[k]);
      ys.push_back(std::log(std::abs(s(k))));
    }
  }
  if (xs.size() < 3) throw FitFailure("relaxation_fit: too few significant envelope points");

  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
  mx /= m, my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0)) throw FitFailure("relaxation_fit: degenerate time window");
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double rss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) rss += std::pow(ys[k] - icpt - slope * xs[k], 2);
  const double se_slope = m > 2 ? std::sqrt(rss / (m - 2) / sxx) : 0.0;

  RelaxationFit fit;
  fit.rate = -slope;
  fit.ci_low = fit.rate - 1.96 * se_slope;
  fit.ci_high = fit.rate + 1.96 * se_slope;
  fit.prefactor = std::exp(icpt);
  fit.points = static_cast<int>(xs.size());
  if (oscillating) {
    const double spacing = (crossings.back() - crossings.front()) / (crossings.size() - 1.0);
    fit.frequency = std::numbers::pi / spacing;
  }
  const double em_shift = opt.exact_ou ? 0.0 : 0.5 * opt.dt * fit.frequency * fit.frequency;
  fit.undamped = fit.rate <= 3 * se_slope + em_shift;
  if (fit.rate <= 0 && !oscillating) throw FitFailure("relaxation_fit: signal does not decay");

  // the Euler-Maruyama mean contracts by |1 - dt lambda| per step
  if (!opt.exact_ou) {
    const ComplexVector ev = eigen_all(make_sde(spec.cfg).drift).eigenvalues;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      const double re = ev(k).real();
      if (!(re > 1e-12)) continue;
      const double em = -std::log(std::abs(1.0 - opt.dt * ev(k))) / opt.dt;
      if (std::abs(em - re) > 0.1 * re) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "step size moves the decay rate of mode %.4g%+.4gi from %.4g to %.4g",
                      re, ev(k).imag(), re, em);
        fit.warnings.push_back(buf);
        break;
      }
    }
  }
  return fit;
}

SlowMode slow_mode(const ChainConfig& cfg) {
  const RealMatrix K = dynamics_matrix(cfg);
  const EigenSystem right = eigen_all(K, true);
  Eigen::Index pick = -1;
  for (Eigen::Index k = 0; k < right.eigenvalues.size(); ++k)
    if (std::abs(right.eigenvalues(k)) > 1e-9) {
      pick = k;
      break;
    }
  if (pick < 0) throw NumericalError("slow_mode: no nonzero mode");
  const cplx lam = right.eigenvalues(pick);
  const EigenSystem left = eigen_all(RealMatrix(K.transpose()), true);
  Eigen::Index lp = 0;
  for (Eigen::Index k = 0; k < left.eigenvalues.size(); ++k)
    if (std::abs(left.eigenvalues(k) - std::conj(lam)) < std::abs(left.eigenvalues(lp) - std::conj(lam))) lp = k;
  auto real_part = [](ComplexVector v) {
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::polar(1.0, -std::arg(v(big)));
    RealVector out = v.real();
    return RealVector(out / out.norm());
  };
  return {real_part(left.eigenvectors->col(lp)), real_part(right.eigenvectors->col(pick)), lam};
}

RealVector site_observable(const ChainConfig& cfg, int site1) {
  if (site1 < 1 || site1 > cfg.n_osc) throw PreconditionError("site_observable: site out of range");
  RealVector l = RealVector::Zero(phase_dim(cfg));
  if (is_planar(cfg)) l(2 * cfg.n_osc + 2 * (site1 - 1)) = 1.0;
  else l(cfg.n_osc + site1 - 1) = 1.0;
  return l;
}

}  // namespace chaingap
