#include "cnsr/lei.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cnsr/spectral.hpp"

namespace cnsr {

namespace {

// space-time integrands
enum St : std::size_t {
  fisher_n,
  lap_sqrt_c,
  quartic,
  grad_u,
  entropy_heat,
  entropy_transport,
  chemo_log,
  chemo,
  gsc_heat,
  gsc_transport,
  gsc_transport_alt,
  kin_heat,
  kin_transport,
  pressure,
  gravity,
  quartic_diag,
  cross,
  // pieces of the exact identities, evaluated with the regularized velocity and saturation
  id_n_transport,
  id_chemo_log,
  id_chemo,
  id_grad_u,
  id_kin_heat,
  id_kin_transport,
  id_pressure,
  id_force,
  st_count
};

// final-time integrands
enum Ft : std::size_t { f_entropy, f_grad_sqrt_c, f_kinetic, f_entropy_shifted, f_kinetic_raw, ft_count };

double clip0(double v) { return v > 0.0 ? v : 0.0; }

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

double wrap(double d, double L) {
  d = std::fmod(d, L);
  if (d < -0.5 * L) d += L;
  if (d >= 0.5 * L) d -= L;
  return d;
}

// Fields shared by every cut-off at one snapshot.
struct SnapshotFields {
  ScalarField nlogn, fisher, lap_sc2, gsc2, quart, quart_diag, grad_u2, u2, p_dev;
  ScalarField chemo_w_form, chemo_log_w_form, chemo_w_act, chemo_log_w_act, cross_w;
  VectorField grad_c, v_form, v_alt, v_act, u, f_form, f_act;
};

SnapshotFields prepare(const State& s, const Sensitivities& sens, const RegParams& rp, const LeiOptions& opt) {
  const GridPtr& g = s.grid_ptr();
  SnapshotFields f;
  const ScalarField n = s.n.map(clip0);
  const ScalarField c = s.c.map(clip0);
  f.nlogn = n.map(xlogx);

  const ScalarField sqrt_n = n.map([](double v) { return std::sqrt(v); });
  const VectorField gsn = gradient(sqrt_n, Dealias::skip);
  f.fisher = gsn.magnitude_squared();

  const ScalarField sqrt_c = c.map([](double v) { return std::sqrt(v); });
  const VectorField gsc = gradient(sqrt_c, Dealias::skip);
  f.gsc2 = gsc.magnitude_squared();
  const ScalarField lap = laplacian(sqrt_c);
  f.lap_sc2 = pointwise(lap, lap);
  f.quart = ScalarField(g);
  f.quart_diag = ScalarField(g);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (f.gsc2[i] == 0.0) continue;
    const double den = std::max(c[i], opt.c_floor);
    f.quart[i] = f.gsc2[i] * f.gsc2[i] / den;
    double d = 0.0;
    for (int a = 0; a < 3; ++a) d += std::pow(gsc[a][i], 4);
    f.quart_diag[i] = d / den;
  }

  f.grad_c = gradient(s.c, Dealias::skip);
  const VectorField grad_n = gradient(s.n, Dealias::skip);
  f.chemo_w_form = ScalarField(g);
  f.chemo_log_w_form = ScalarField(g);
  f.chemo_w_act = ScalarField(g);
  f.chemo_log_w_act = ScalarField(g);
  f.cross_w = ScalarField(g);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double chi = sens.chi(c[i]);
    const double sat_act = saturated_density(n[i], rp.tau);
    const double sat_form = opt.limit_form ? n[i] : sat_act;
    const double ln = n[i] > 0.0 ? std::log(n[i]) : 0.0;
    f.chemo_w_act[i] = sat_act * chi;
    f.chemo_log_w_act[i] = sat_act * chi * ln;
    f.chemo_w_form[i] = sat_form * chi;
    f.chemo_log_w_form[i] = sat_form * chi * ln;
    const double gcgn = f.grad_c[0][i] * grad_n[0][i] + f.grad_c[1][i] * grad_n[1][i] + f.grad_c[2][i] * grad_n[2][i];
    f.cross_w[i] = chi / (1.0 + rp.tau * n[i]) * gcgn;
  }

  f.u = s.u;
  f.u2 = s.u.magnitude_squared();
  f.grad_u2 = ScalarField(g);
  for (int a = 0; a < 3; ++a) f.grad_u2 += gradient(s.u[a], Dealias::skip).magnitude_squared();
  f.v_act = mollify(s.u, rp.epsilon);
  f.v_form = opt.limit_form ? s.u : f.v_act;
  f.v_alt = opt.limit_form ? f.v_act : s.u;

  f.p_dev = s.p.size() ? s.p : ScalarField(g);
  f.p_dev += -f.p_dev.mean();

  f.f_act = effective_forcing(s.n, rp);
  if (opt.limit_form) {
    RegParams bare = rp;
    bare.epsilon = 0.0;
    f.f_form = effective_forcing(s.n, bare);
  } else {
    f.f_form = f.f_act;
  }
  return f;
}

void integrands(const SnapshotFields& f, const CutoffPsi& psi, const Grid& g, const Sensitivities& sens,
                const RegParams& rp, const LeiOptions& opt, double t, std::vector<double>& st, std::vector<double>& ft) {
  st.assign(st_count, 0.0);
  ft.assign(ft_count, 0.0);
  const double th = sens.theta0;
  const double kc = 18.0 / th * opt.c0_inf;
  const int n = g.n();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const auto P = psi.eval(g.coordinate(ix), g.coordinate(iy), g.coordinate(iz), t);
        if (P.value == 0.0 && P.dt == 0.0 && P.grad[0] == 0.0 && P.grad[1] == 0.0 && P.grad[2] == 0.0 && P.lap == 0.0)
          continue;
        const std::size_t i = g.index(ix, iy, iz);
        const double heat = P.dt + P.lap;
        auto dotg = [&](const VectorField& v) { return v[0][i] * P.grad[0] + v[1][i] * P.grad[1] + v[2][i] * P.grad[2]; };
        const double gc_gpsi = dotg(f.grad_c);
        const double v_form = dotg(f.v_form), v_alt = dotg(f.v_alt), v_act = dotg(f.v_act), u_g = dotg(f.u);
        const double fu_form = f.f_form[0][i] * f.u[0][i] + f.f_form[1][i] * f.u[1][i] + f.f_form[2][i] * f.u[2][i];
        const double fu_act = f.f_act[0][i] * f.u[0][i] + f.f_act[1][i] * f.u[1][i] + f.f_act[2][i] * f.u[2][i];

        st[fisher_n] += 4.0 * f.fisher[i] * P.value;
        st[lap_sqrt_c] += 4.0 / (3.0 * th) * f.lap_sc2[i] * P.value;
        st[quartic] += 2.0 / (3.0 * th) * f.quart[i] * P.value;
        st[grad_u] += kc * f.grad_u2[i] * P.value;
        st[entropy_heat] += f.nlogn[i] * heat;
        st[entropy_transport] += f.nlogn[i] * v_form;
        st[chemo_log] += f.chemo_log_w_form[i] * gc_gpsi;
        st[chemo] += f.chemo_w_form[i] * gc_gpsi;
        st[gsc_heat] += 2.0 / th * f.gsc2[i] * heat;
        st[gsc_transport] += 2.0 / th * f.gsc2[i] * v_form;
        st[gsc_transport_alt] += 2.0 / th * f.gsc2[i] * v_alt;
        st[kin_heat] += kc * f.u2[i] * heat;
        st[kin_transport] += kc * rp.mu * f.u2[i] * v_form;
        st[pressure] += 2.0 * kc * f.p_dev[i] * u_g;
        st[gravity] += -2.0 * kc * fu_form * P.value;
        st[quartic_diag] += 2.0 / (3.0 * th) * f.quart_diag[i] * P.value;
        st[cross] += f.cross_w[i] * P.value;
        st[id_n_transport] += f.nlogn[i] * v_act;
        st[id_chemo_log] += f.chemo_log_w_act[i] * gc_gpsi;
        st[id_chemo] += f.chemo_w_act[i] * gc_gpsi;
        st[id_grad_u] += f.grad_u2[i] * P.value;
        st[id_kin_heat] += f.u2[i] * heat;
        st[id_kin_transport] += rp.mu * f.u2[i] * v_act;
        st[id_pressure] += f.p_dev[i] * u_g;
        st[id_force] += fu_act * P.value;

        ft[f_entropy] += f.nlogn[i] * P.value;
        ft[f_grad_sqrt_c] += 2.0 / th * f.gsc2[i] * P.value;
        ft[f_kinetic] += kc * f.u2[i] * P.value;
        ft[f_entropy_shifted] += (f.nlogn[i] + std::exp(-1.0)) * P.value;
        ft[f_kinetic_raw] += f.u2[i] * P.value;
      }
  const double dv = g.cell_volume();
  for (double& v : st) v *= dv;
  for (double& v : ft) v *= dv;
}

void validate_psi(const CutoffPsi& p) {
  if (!(p.r > 0.0 && p.r < 0.5 * p.box_length)) throw std::invalid_argument("cut-off: radius must lie in (0, L/2)");
  if (!(p.t1 < p.t2)) throw std::invalid_argument("cut-off: need t1 < t2");
  if (!(p.sharpness >= 3.0)) throw std::invalid_argument("cut-off: sharpness must be >= 3 for a C2 bump");
  if (!(p.amplitude >= 0.0)) throw std::invalid_argument("cut-off: amplitude must be >= 0");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CutoffPsi::Point CutoffPsi::eval(double x, double y, double z, double t) const {
  Point out{0.0, 0.0, {0.0, 0.0, 0.0}, 0.0};
  const double d[3] = {wrap(x - center[0], box_length), wrap(y - center[1], box_length), wrap(z - center[2], box_length)};
  const double r2 = r * r;
  const double d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  const double s = d2 / r2;
  if (s >= 1.0) return out;
  const double th = std::clamp((t - t1) / (t2 - t1), 0.0, 1.0);
  const double S = th * th * th * (10.0 - 15.0 * th + 6.0 * th * th);
  const double dS = (t <= t1 || t >= t2) ? 0.0 : 30.0 * th * th * (1.0 - th) * (1.0 - th) / (t2 - t1);
  const double p = sharpness;
  const double one = 1.0 - s;
  const double B = std::pow(one, p);
  const double B1 = -p * std::pow(one, p - 1.0);
  const double B2 = p * (p - 1.0) * std::pow(one, p - 2.0);
  out.value = amplitude * B * S;
  out.dt = amplitude * B * dS;
  for (int a = 0; a < 3; ++a) out.grad[a] = amplitude * S * B1 * 2.0 * d[a] / r2;
  out.lap = amplitude * S * (B2 * 4.0 * d2 / (r2 * r2) + B1 * 6.0 / r2);
  return out;
}

CutoffPsi make_psi(std::array<double, 3> center, double r, double t1, double t2, double box_length, double sharpness,
                   double amplitude) {
  CutoffPsi p{center, r, t1, t2, sharpness, amplitude, box_length};
  if (!(box_length > 0.0)) throw std::invalid_argument("cut-off: box length must be positive");
  validate_psi(p);
  return p;
}

std::vector<CutoffPsi> random_psi_suite(int K, std::uint64_t seed, double box_length, double T, double sample_dt) {
  if (K < 0) throw std::invalid_argument("random_psi_suite: K must be >= 0");
  if (!(T > 0.0 && sample_dt > 0.0)) throw std::invalid_argument("random_psi_suite: need T > 0 and sample_dt > 0");
  const long steps = std::lround(T / sample_dt);
  if (steps < 2) throw std::invalid_argument("random_psi_suite: horizon shorter than two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CutoffPsi> out;
  for (int k = 0; k < K; ++k) {
    std::array<double, 3> c{unit(rng) * box_length, unit(rng) * box_length, unit(rng) * box_length};
    const double r = box_length * (0.2 + 0.25 * unit(rng));
    const long i1 = static_cast<long>(unit(rng) * 0.5 * steps);
    const long i2 = std::max(i1 + 1, static_cast<long>(std::lround((0.6 + 0.4 * unit(rng)) * steps)));
    out.push_back(make_psi(c, r, i1 * sample_dt, std::min(i2, steps) * sample_dt, box_length));
  }
  return out;
}

LeiAccumulator::LeiAccumulator(std::vector<CutoffPsi> psis, Sensitivities sens, RegParams rp, LeiOptions opt)
    : psis_(std::move(psis)), sens_(std::move(sens)), rp_(std::move(rp)), opt_(opt) {
  for (const auto& p : psis_) validate_psi(p);
  if (!(opt_.c0_inf >= 0.0)) throw std::invalid_argument("LeiAccumulator: c0_inf must be >= 0");
  integrals_.assign(psis_.size(), std::vector<double>(st_count, 0.0));
  last_.assign(psis_.size(), std::vector<double>(st_count, 0.0));
  final_.assign(psis_.size(), std::vector<double>(ft_count, 0.0));
  started_.assign(psis_.size(), false);
  done_.assign(psis_.size(), false);
}

void LeiAccumulator::add(const State& s) {
  if (any_ && s.t < last_t_) throw std::invalid_argument("LeiAccumulator: snapshot times must not decrease");
  if (any_ && opt_.max_gap > 0.0 && s.t - last_t_ > opt_.max_gap * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "LeiAccumulator: gap " << s.t - last_t_ << " between snapshots at t = " << last_t_ << " and " << s.t
        << " exceeds the step " << opt_.max_gap;
    throw std::invalid_argument(msg.str());
  }
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < psis_.size(); ++k) {
    if (done_[k]) continue;
    const auto& p = psis_[k];
    const double tol = 1e-9 * std::max(1.0, std::abs(p.t2));
    if (s.t < p.t1 - tol) continue;
    if (s.t > p.t2 + tol) throw std::invalid_argument("LeiAccumulator: no snapshot at the window end t2");
    active.push_back(k);
  }
  if (!active.empty()) {
    const SnapshotFields f = prepare(s, sens_, rp_, opt_);
    std::vector<double> st, ft;
    for (std::size_t k : active) {
      const auto& p = psis_[k];
      const double tol = 1e-9 * std::max(1.0, std::abs(p.t2));
      integrands(f, p, s.grid(), sens_, rp_, opt_, s.t, st, ft);
      if (!started_[k]) {
        if (s.t > p.t1 + tol) {
          // psi vanishes identically before t1, so an earlier snapshot anchors the window
          if (!any_) throw std::invalid_argument("LeiAccumulator: snapshots start after the window start t1");
          const double h = s.t - last_t_;
          for (std::size_t j = 0; j < st_count; ++j) integrals_[k][j] += 0.5 * h * st[j];
        }
        started_[k] = true;
      } else {
        const double h = s.t - last_t_;
        for (std::size_t j = 0; j < st_count; ++j) integrals_[k][j] += 0.5 * h * (st[j] + last_[k][j]);
      }
      last_[k] = st;
      if (std::abs(s.t - p.t2) <= tol) {
        final_[k] = ft;
        done_[k] = true;
      }
    }
  }
  last_t_ = s.t;
  any_ = true;
}

std::vector<LeiReport> LeiAccumulator::finish() const {
  std::vector<LeiReport> out;
  for (std::size_t k = 0; k < psis_.size(); ++k) {
    if (!done_[k]) throw std::invalid_argument("LeiAccumulator: trajectory does not reach the window end t2");
    const auto& I = integrals_[k];
    const auto& F = final_[k];
    LeiReport r;
    r.psi = psis_[k];
    r.lhs_entropy = F[f_entropy];
    r.lhs_fisher_n = I[fisher_n];
    r.lhs_grad_sqrt_c = F[f_grad_sqrt_c];
    r.lhs_lap_sqrt_c = I[lap_sqrt_c];
    r.lhs_quartic_c = I[quartic];
    r.lhs_kinetic = F[f_kinetic];
    r.lhs_grad_u = I[grad_u];
    r.rhs_entropy_heat = I[entropy_heat];
    r.rhs_entropy_transport = I[entropy_transport];
    r.rhs_chemo_log = I[chemo_log];
    r.rhs_chemo = I[chemo];
    r.rhs_grad_sqrt_c_heat = I[gsc_heat];
    r.rhs_grad_sqrt_c_transport = I[gsc_transport];
    r.rhs_kinetic_heat = I[kin_heat];
    r.rhs_kinetic_transport = I[kin_transport];
    r.rhs_pressure_work = I[pressure];
    r.rhs_gravity_work = I[gravity];
    r.rhs_grad_sqrt_c_transport_alt = I[gsc_transport_alt];
    r.lhs_entropy_shifted = F[f_entropy_shifted];
    r.lhs_quartic_c_diag = I[quartic_diag];
    r.cross_term = I[cross];
    r.defect_n = F[f_entropy] + I[fisher_n] -
                 (I[entropy_heat] + I[id_n_transport] + I[id_chemo_log] + I[id_chemo] + I[cross]);
    r.defect_u = F[f_kinetic_raw] + 2.0 * I[id_grad_u] -
                 (I[id_kin_heat] + I[id_kin_transport] + 2.0 * I[id_pressure] - 2.0 * I[id_force]);
    r.eta = std::abs(r.defect_n) + 18.0 / sens_.theta0 * opt_.c0_inf * std::abs(r.defect_u);
    r.lhs_total = r.lhs_entropy + r.lhs_fisher_n + r.lhs_grad_sqrt_c + r.lhs_lap_sqrt_c + r.lhs_quartic_c +
                  r.lhs_kinetic + r.lhs_grad_u;
    r.rhs_total = r.rhs_entropy_heat + r.rhs_entropy_transport + r.rhs_chemo_log + r.rhs_chemo +
                  r.rhs_grad_sqrt_c_heat + r.rhs_grad_sqrt_c_transport + r.rhs_kinetic_heat + r.rhs_kinetic_transport +
                  r.rhs_pressure_work + r.rhs_gravity_work;
    r.residual = r.rhs_total - r.lhs_total;
    out.push_back(r);
  }
  return out;
}

std::vector<LeiReport> evaluate_lei(const std::vector<State>& trajectory, const std::vector<CutoffPsi>& psis,
                                    const Sensitivities& sens, const RegParams& rp, const LeiOptions& opt) {
  LeiAccumulator acc(psis, sens, rp, opt);
  for (const auto& s : trajectory) {
    if (s.p.size() && std::abs(s.p.mean()) > 1e-10 * std::max(1.0, s.p.max_abs()))
      throw std::invalid_argument("evaluate_lei: snapshot pressure is not mean-zero");
    acc.add(s);
  }
  return acc.finish();
}

std::vector<std::pair<std::string, double>> LeiReport::named_terms() const {
  return {{"lhs_entropy", lhs_entropy},
          {"lhs_fisher_n", lhs_fisher_n},
          {"lhs_grad_sqrt_c", lhs_grad_sqrt_c},
          {"lhs_lap_sqrt_c", lhs_lap_sqrt_c},
          {"lhs_quartic_c", lhs_quartic_c},
          {"lhs_kinetic", lhs_kinetic},
          {"lhs_grad_u", lhs_grad_u},
          {"rhs_entropy_heat", rhs_entropy_heat},
          {"rhs_entropy_transport", rhs_entropy_transport},
          {"rhs_chemo_log", rhs_chemo_log},
          {"rhs_chemo", rhs_chemo},
          {"rhs_grad_sqrt_c_heat", rhs_grad_sqrt_c_heat},
          {"rhs_grad_sqrt_c_transport", rhs_grad_sqrt_c_transport},
          {"rhs_kinetic_heat", rhs_kinetic_heat},
          {"rhs_kinetic_transport", rhs_kinetic_transport},
          {"rhs_pressure_work", rhs_pressure_work},
          {"rhs_gravity_work", rhs_gravity_work},
          {"rhs_grad_sqrt_c_transport_alt", rhs_grad_sqrt_c_transport_alt},
          {"lhs_entropy_shifted", lhs_entropy_shifted},
          {"lhs_quartic_c_diag", lhs_quartic_c_diag},
          {"cross_term", cross_term},
          {"defect_n", defect_n},
          {"defect_u", defect_u},
          {"eta", eta},
          {"lhs_total", lhs_total},
          {"rhs_total", rhs_total},
          {"residual", residual}};
}

void write_lei_csv(std::ostream& os, const std::vector<LeiReport>& reports) {
  os << "psi,cx,cy,cz,r,t1,t2";
  const auto names = LeiReport{}.named_terms();
  for (const auto& [name, v] : names) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    os << k << ',' << fmt(r.psi.center[0]) << ',' << fmt(r.psi.center[1]) << ',' << fmt(r.psi.center[2]) << ','
       << fmt(r.psi.r) << ',' << fmt(r.psi.t1) << ',' << fmt(r.psi.t2);
    for (const auto& [name, v] : r.named_terms()) os << ',' << fmt(v);
    os << '\n';
  }
}

}  // namespace cnsr
