#include "cnsr/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cnsr {

namespace {

// |grad f|^2 integrated over the box, using the same Nyquist-free symbol as the
// spectral derivative.
double grad_sq(const SpectralField& fh) {
  const Grid& g = fh.grid();
  const auto kx = g.kx_odd(), ky = g.ky_odd(), kz = g.kz_odd();
  const auto w = g.hermitian_weight();
  double s = 0.0;
  for (std::size_t i = 0; i < fh.size(); ++i) s += w[i] * (kx[i] * kx[i] + ky[i] * ky[i] + kz[i] * kz[i]) * std::norm(fh[i]);
  return s * g.volume();
}

SNorm sample_norm(const State& s) {
  SNorm r;
  const SpectralField nh = to_spectral(s.n);
  const SpectralField ch = to_spectral(s.c);
  r.n_inf = s.n.max_abs();
  r.n_w12 = std::sqrt(spectral::weighted_norm_sq(nh, 0.0) + grad_sq(nh));
  r.grad_c_inf = gradient(s.c, Dealias::skip).max_magnitude();
  r.c_l2 = std::sqrt(spectral::weighted_norm_sq(ch, 0.0));
  r.hess_c_l2 = std::sqrt(spectral::weighted_norm_sq(ch, 2.0));
  double u2 = 0.0, hu2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const SpectralField uh = to_spectral(s.u[a]);
    u2 += spectral::weighted_norm_sq(uh, 0.0);
    hu2 += spectral::weighted_norm_sq(uh, 2.0);
  }
  r.u_l2 = std::sqrt(u2);
  r.hess_u_l2 = std::sqrt(hu2);
  return r;
}

State difference(const State& a, const State& b) {
  State d;
  d.n = a.n - b.n;
  d.c = a.c - b.c;
  d.u = a.u - b.u;
  d.p = ScalarField(a.grid_ptr());
  d.t = a.t;
  return d;
}

void check_iterate(const State& s, int sample, const char* stage) {
  bool ok = all_finite(s.n) && all_finite(s.c);
  for (int a = 0; a < 3; ++a) ok = ok && all_finite(s.u[a]);
  if (!ok) {
    std::ostringstream msg;
    msg << "phi_map: non-finite " << stage << " at sample " << sample;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

double SNorm::total() const {
  double s = 0.0;
  for (double v : components()) s += v;
  return s;
}

MildIterate MildIterate::heat_flow(const State& init, double T, int m) {
  if (!(T > 0.0)) throw std::invalid_argument("MildIterate: horizon must be positive");
  if (m < 1) throw std::invalid_argument("MildIterate: need at least one interval");
  MildIterate it{T, m, {}};
  it.samples.reserve(static_cast<std::size_t>(m) + 1);
  it.samples.push_back(init);
  it.samples.back().t = 0.0;
  for (int j = 1; j <= m; ++j) {
    State s;
    const double t = it.time(j);
    s.n = heat_propagate(init.n, t);
    s.c = heat_propagate(init.c, t);
    s.u = {heat_propagate(init.u[0], t), heat_propagate(init.u[1], t), heat_propagate(init.u[2], t)};
    s.p = ScalarField(init.grid_ptr());
    s.t = t;
    it.samples.push_back(std::move(s));
  }
  return it;
}

SNorm s_norm(const MildIterate& it) {
  SNorm r;
  for (const auto& s : it.samples) {
    const SNorm x = sample_norm(s);
    r.n_inf = std::max(r.n_inf, x.n_inf);
    r.n_w12 = std::max(r.n_w12, x.n_w12);
    r.grad_c_inf = std::max(r.grad_c_inf, x.grad_c_inf);
    r.c_l2 = std::max(r.c_l2, x.c_l2);
    r.hess_c_l2 = std::max(r.hess_c_l2, x.hess_c_l2);
    r.u_l2 = std::max(r.u_l2, x.u_l2);
    r.hess_u_l2 = std::max(r.hess_u_l2, x.hess_u_l2);
  }
  return r;
}

double s_distance(const MildIterate& a, const MildIterate& b) {
  if (a.samples.size() != b.samples.size()) throw std::invalid_argument("s_distance: sample counts differ");
  MildIterate d{a.T, a.m, {}};
  for (std::size_t j = 0; j < a.samples.size(); ++j) d.samples.push_back(difference(a.samples[j], b.samples[j]));
  return s_norm(d).total();
}

MildIterate phi_map(const MildIterate& it, const State& init, const Sensitivities& sens, const RegParams& rp) {
  if (it.samples.size() != static_cast<std::size_t>(it.m) + 1)
    throw std::invalid_argument("phi_map: iterate has the wrong number of samples");
  const double h = it.spacing();

  MildIterate out{it.T, it.m, {}};
  out.samples.reserve(it.samples.size());
  out.samples.push_back(init);
  out.samples.back().t = 0.0;

  // Running trapezoid sum of the propagated nonlinearities:
  // I_j = E(h) (I_{j-1} + h/2 N_{j-1}) + h/2 N_j.
  SpectralTendency acc;
  SpectralTendency prev = nonlinear_tendency(it.samples[0], sens, rp);
  acc.n = SpectralField(init.grid_ptr());
  acc.c = SpectralField(init.grid_ptr());
  for (auto& ui : acc.u) ui = SpectralField(init.grid_ptr());

  const SpectralField n0 = to_spectral(init.n);
  const SpectralField c0 = to_spectral(init.c);
  const SpectralVector u0 = to_spectral(init.u);

  for (int j = 1; j <= it.m; ++j) {
    check_iterate(it.samples[static_cast<std::size_t>(j)], j, "input");
    const SpectralTendency cur = nonlinear_tendency(it.samples[static_cast<std::size_t>(j)], sens, rp);
    acc.n.add_scaled(prev.n, 0.5 * h);
    acc.c.add_scaled(prev.c, 0.5 * h);
    for (std::size_t a = 0; a < 3; ++a) acc.u[a].add_scaled(prev.u[a], 0.5 * h);
    spectral::apply_heat(acc.n, h);
    spectral::apply_heat(acc.c, h);
    for (auto& ui : acc.u) spectral::apply_heat(ui, h);
    acc.n.add_scaled(cur.n, 0.5 * h);
    acc.c.add_scaled(cur.c, 0.5 * h);
    for (std::size_t a = 0; a < 3; ++a) acc.u[a].add_scaled(cur.u[a], 0.5 * h);

    const double t = it.time(j);
    SpectralField nj = n0, cj = c0;
    SpectralVector uj = u0;
    spectral::apply_heat(nj, t);
    spectral::apply_heat(cj, t);
    for (auto& ui : uj) spectral::apply_heat(ui, t);
    nj += acc.n;
    cj += acc.c;
    for (std::size_t a = 0; a < 3; ++a) uj[a] += acc.u[a];
    spectral::apply_leray(uj);

    State s;
    s.n = to_physical(nj);
    s.c = to_physical(cj);
    s.u = to_physical(uj);
    s.p = ScalarField(init.grid_ptr());
    s.t = t;
    check_iterate(s, j, "output");
    out.samples.push_back(std::move(s));
    prev = cur;
  }
  return out;
}

PicardResult picard_solve(const State& init, double T, int m, double tol, int max_iter, const Sensitivities& sens,
                          const RegParams& rp) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
  PicardResult res;
  MildIterate it = MildIterate::heat_flow(init, T, m);
  int increases = 0;
  for (int k = 0; k < max_iter; ++k) {
    MildIterate next = phi_map(it, init, sens, rp);
    const double d = s_distance(next, it);
    if (!res.history.empty() && d > res.history.back()) {
      if (++increases >= 3) {
        std::ostringstream msg;
        msg << "picard_solve: distance increased three times in a row (d = " << d << " at iteration " << k
            << "); retry with horizon T <= " << T / 2;
        throw PicardDivergence(msg.str(), T / 2);
      }
    } else {
      increases = 0;
    }
    res.history.push_back(d);
    it = std::move(next);
    if (d <= tol) {
      res.converged = true;
      break;
    }
  }
  res.fixed_point = std::move(it);
  return res;
}

}  // namespace cnsr
