#include "leowb/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace leowb {

ArrayGeometry ArrayGeometry::uniform_planar(int n_x, int n_y, double spacing_wl,
                                            double wavelength_m) {
  if (n_x < 1 || n_y < 1) throw InvalidArgument("uniform_planar: grid dimensions must be >= 1");
  if (!(spacing_wl > 0.0)) throw InvalidArgument("uniform_planar: spacing must be positive");
  ArrayGeometry g;
  g.n_x = n_x;
  g.n_y = n_y;
  g.spacing_wl = spacing_wl;
  g.is_grid = true;
  const double d = spacing_wl * wavelength_m;
  const double cx = 0.5 * (n_x - 1), cy = 0.5 * (n_y - 1);
  g.element_positions.reserve(static_cast<std::size_t>(n_x) * n_y);
  for (int ix = 0; ix < n_x; ++ix)
    for (int iy = 0; iy < n_y; ++iy)
      g.element_positions.emplace_back((ix - cx) * d, (iy - cy) * d, 0.0);
  return g;
}

ArrayGeometry ArrayGeometry::custom(std::vector<Eigen::Vector3d> positions) {
  ArrayGeometry g;
  g.n_x = static_cast<int>(positions.size());
  g.n_y = 1;
  g.spacing_wl = 0.0;
  g.is_grid = false;
  g.element_positions = std::move(positions);
  return g;
}

Eigen::Vector3d to_ecef(const GeodeticPosition& p) {
  const double r = kEarthRadius + p.alt_m;
  return {r * std::cos(p.lat_rad) * std::cos(p.lon_rad),
          r * std::cos(p.lat_rad) * std::sin(p.lon_rad), r * std::sin(p.lat_rad)};
}

double orbital_speed(double altitude_m) { return std::sqrt(kEarthMu / (kEarthRadius + altitude_m)); }

namespace {

Eigen::Vector3d local_north(const GeodeticPosition& p) {
  return {-std::sin(p.lat_rad) * std::cos(p.lon_rad), -std::sin(p.lat_rad) * std::sin(p.lon_rad),
          std::cos(p.lat_rad)};
}

Eigen::Vector3d local_east(const GeodeticPosition& p) {
  return {-std::sin(p.lon_rad), std::cos(p.lon_rad), 0.0};
}

}  // namespace

OrbitState propagate_pass(const OrbitParams& orbit, std::span<const UserTerminal> users, double t) {
  if (!(t >= 0.0 && t <= orbit.pass_s))
    throw InvalidArgument("propagate_pass: t outside [0, pass duration]");

  const double radius = kEarthRadius + orbit.altitude_m;
  const double omega = orbital_speed(orbit.altitude_m) / radius;
  const double beta = omega * (t - 0.5 * orbit.pass_s);
  const Eigen::Vector3d c_hat = to_ecef(GeodeticPosition{orbit.centroid.lat_rad, orbit.centroid.lon_rad, 0.0}).normalized();
  const Eigen::Vector3d north = local_north(orbit.centroid);

  OrbitState st;
  st.altitude_m = orbit.altitude_m;
  st.time_s = t;
  st.satellite_position = radius * (std::cos(beta) * c_hat + std::sin(beta) * north);
  st.satellite_velocity = radius * omega * (-std::sin(beta) * c_hat + std::cos(beta) * north);
  st.frame.z = -st.satellite_position.normalized();
  st.frame.x = st.satellite_velocity.normalized();
  st.frame.y = st.frame.z.cross(st.frame.x);

  const double min_el = orbit.min_elevation_deg * kPi / 180.0;
  const auto K = users.size();
  st.theta.resize(K);
  st.phi.resize(K);
  st.slant_range.resize(K);
  st.elevation.resize(K);
  for (std::size_t n = 0; n < K; ++n) {
    const Eigen::Vector3d u = to_ecef(users[n].position);
    const Eigen::Vector3d d = u - st.satellite_position;
    const double range = d.norm();
    const Eigen::Vector3d dh = d / range;
    st.slant_range[n] = range;
    st.theta[n] = std::acos(std::clamp(dh.dot(st.frame.z), -1.0, 1.0));
    st.phi[n] = std::atan2(dh.dot(st.frame.y), dh.dot(st.frame.x));
    st.elevation[n] = std::asin(std::clamp((-dh).dot(u.normalized()), -1.0, 1.0));
    if (st.elevation[n] < min_el)
      throw BelowMinElevation("propagate_pass: UT " + std::to_string(n) + " at t=" +
                              std::to_string(t) + " s is below the elevation mask");
  }
  return st;
}

std::vector<GeodeticPosition> place_users_uniform_disk(const GeodeticPosition& center,
                                                       double radius_m, int count,
                                                       RandomSource& rng) {
  const Eigen::Vector3d c_hat = to_ecef(GeodeticPosition{center.lat_rad, center.lon_rad, 0.0}).normalized();
  const Eigen::Vector3d north = local_north(center), east = local_east(center);
  std::vector<GeodeticPosition> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double rho = radius_m * std::sqrt(rng.uniform());
    const double psi = 2.0 * kPi * rng.uniform();
    const double delta = rho / kEarthRadius;
    const Eigen::Vector3d dir = std::cos(psi) * north + std::sin(psi) * east;
    const Eigen::Vector3d p = std::cos(delta) * c_hat + std::sin(delta) * dir;
    out.push_back({std::asin(std::clamp(p.z(), -1.0, 1.0)), std::atan2(p.y(), p.x()), 0.0});
  }
  return out;
}

ComplexVector array_manifold(double theta, double phi, const ArrayGeometry& geom,
                             double wavelength_m) {
  const int n = geom.num_elements();
  const double k = 2.0 * kPi / wavelength_m;
  const Eigen::Vector3d kappa(k * std::sin(theta) * std::cos(phi),
                              k * std::sin(theta) * std::sin(phi), k * std::cos(theta));
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector a(n);
  for (int m = 0; m < n; ++m) {
    const double ph = kappa.dot(geom.element_positions[static_cast<std::size_t>(m)]);
    a(m) = Complex(std::cos(ph) * norm, std::sin(ph) * norm);
  }
  return a;
}

ComplexVector rician_mix(const ComplexVector& h_los, double K_R_linear,
                         const ComplexVector& unit_nlos) {
  if (!(K_R_linear >= 0.0)) throw InvalidArgument("rician: K_R must be >= 0");
  if (unit_nlos.size() != h_los.size())
    throw DimensionMismatch("rician: NLOS draw length differs from LOS vector");
  const double kr = std::min(K_R_linear, 1e12);
  const double n = static_cast<double>(h_los.size());
  const double nlos_scale = n > 0 ? h_los.norm() / std::sqrt(n) : 0.0;
  return std::sqrt(kr / (kr + 1.0)) * h_los +
         (std::sqrt(1.0 / (kr + 1.0)) * nlos_scale) * unit_nlos;
}

ComplexVector rician_channel(const ComplexVector& h_los, double K_R_linear, RandomSource& rng) {
  ComplexVector w(h_los.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.complex_normal();
  return rician_mix(h_los, K_R_linear, w);
}

double free_space_path_loss_dB(double distance_m, double carrier_Hz) {
  if (!(distance_m > 0.0)) throw InvalidArgument("free_space_path_loss: distance must be positive");
  return 20.0 * std::log10(4.0 * kPi * distance_m / wavelength(carrier_Hz));
}

double los_gain(double slant_range_m, double carrier_Hz, const UserTerminal& ut,
                double extra_loss_dB) {
  const double gain_dB =
      ut.antenna_gain_dBi - free_space_path_loss_dB(slant_range_m, carrier_Hz) - extra_loss_dB;
  return std::pow(10.0, gain_dB / 20.0);
}

// ---------------------------------------------------------------------------

namespace {

ComplexMatrix dft_matrix(int n) {
  ComplexMatrix d(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      // reduce the exponent modulo n so large i*k keep full phase accuracy
      const double ph = 2.0 * kPi * static_cast<double>((i * k) % n) / n;
      d(i, k) = Complex(std::cos(ph) * s, std::sin(ph) * s);
    }
  return d;
}

}  // namespace

DftCodebook::DftCodebook(int n_x, int n_y) : n_x_(n_x), n_y_(n_y) {
  if (n_x < 1 || n_y < 1) throw InvalidArgument("DftCodebook: grid dimensions must be >= 1");
  dx_ = dft_matrix(n_x);
  dy_ = dft_matrix(n_y);
  full_.resize(n_x * n_y, n_x * n_y);
  for (int ix = 0; ix < n_x; ++ix)
    for (int bx = 0; bx < n_x; ++bx)
      full_.block(ix * n_y, bx * n_y, n_y, n_y) = dx_(ix, bx) * dy_;
}

ComplexVector DftCodebook::codeword(int b) const {
  if (b < 0 || b >= size()) throw InvalidArgument("DftCodebook: codeword index out of range");
  return full_.col(b);
}

Eigen::MatrixXd DftCodebook::beam_powers(const ComplexMatrix& H_tilde) const {
  const int nt = size();
  if (H_tilde.cols() != nt) throw DimensionMismatch("beam_powers: H_tilde width differs from N_t");
  Eigen::MatrixXd P(H_tilde.rows(), nt);
  ComplexVector row(nt);
  for (Eigen::Index n = 0; n < H_tilde.rows(); ++n) {
    row = H_tilde.row(n).transpose();
    // Mt(iy, ix) = h[ix * n_y + iy]; result(by, bx) = h . c_{bx * n_y + by}
    Eigen::Map<const ComplexMatrix> Mt(row.data(), n_y_, n_x_);
    const ComplexMatrix proj = dy_.transpose() * Mt * dx_;
    P.row(n) = Eigen::Map<const Eigen::VectorXcd>(proj.data(), nt).cwiseAbs2().transpose();
  }
  return P;
}

DftCodebook dft_codebook(const ArrayGeometry& geom) {
  if (!geom.is_grid || geom.n_x * geom.n_y != geom.num_elements())
    throw UnsupportedGeometry("dft_codebook: array is not a uniform planar grid");
  return DftCodebook(geom.n_x, geom.n_y);
}

BeamSelection select_beams_from_powers(const Eigen::MatrixXd& powers, const DftCodebook& codebook,
                                       int N_RF) {
  const int K = static_cast<int>(powers.rows());
  const int nb = codebook.size();
  if (powers.cols() != nb) throw DimensionMismatch("select_beams: power matrix width differs from codebook");
  if (N_RF < K || N_RF > nb) throw InvalidArgument("select_beams: need K <= N_RF <= codebook size");

  std::vector<char> used(static_cast<std::size_t>(nb), 0);
  BeamSelection sel;
  sel.indices.reserve(static_cast<std::size_t>(N_RF));

  auto best_unused = [&](auto&& score) {
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < nb; ++b) {
      if (used[static_cast<std::size_t>(b)]) continue;
      const double v = score(b);
      if (v > best_val) {  // strict: earlier index wins ties
        best_val = v;
        best = b;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    sel.indices.push_back(best);
  };

  for (int n = 0; n < K; ++n) best_unused([&](int b) { return powers(n, b); });
  if (N_RF > K) {
    const Eigen::VectorXd total = powers.colwise().sum().transpose();
    for (int extra = K; extra < N_RF; ++extra) best_unused([&](int b) { return total(b); });
  }

  sel.F_RF.resize(codebook.size(), N_RF);
  for (int j = 0; j < N_RF; ++j) sel.F_RF.col(j) = codebook.matrix().col(sel.indices[static_cast<std::size_t>(j)]);
  return sel;
}

BeamSelection select_beams(const ComplexMatrix& H_tilde, const DftCodebook& codebook, int N_RF) {
  return select_beams_from_powers(codebook.beam_powers(H_tilde), codebook, N_RF);
}

// ---------------------------------------------------------------------------

ChannelProcess::ChannelProcess(OrbitParams orbit, LinkParams link, std::vector<UserTerminal> users)
    : orbit_(std::move(orbit)),
      link_(std::move(link)),
      users_(std::move(users)),
      codebook_(dft_codebook(link_.array)),
      wavelength_(wavelength(link_.carrier_Hz)) {
  if (users_.empty()) throw InvalidArgument("ChannelProcess: no users");
  if (link_.nlos_block < 1 || link_.beam_hold < 1)
    throw InvalidArgument("ChannelProcess: nlos_block and beam_hold must be >= 1");
}

ChannelSnapshot ChannelProcess::next(double t, RandomSource& rng) {
  const int K = static_cast<int>(users_.size());
  const int nt = link_.array.num_elements();

  ChannelSnapshot s;
  s.timestamp_s = t;
  s.orbit = propagate_pass(orbit_, users_, t);

  s.H_tilde.resize(K, nt);
  s.gamma.resize(static_cast<std::size_t>(K));
  for (int n = 0; n < K; ++n) {
    const auto un = static_cast<std::size_t>(n);
    s.H_tilde.row(n) = array_manifold(s.orbit.theta[un], s.orbit.phi[un], link_.array, wavelength_).adjoint();
    s.gamma[un] = los_gain(s.orbit.slant_range[un], link_.carrier_Hz, users_[un], link_.atmospheric_loss_dB);
  }

  if (step_ % link_.nlos_block == 0) held_nlos_ = rng.complex_normal_matrix(K, nt);
  s.H.resize(K, nt);
  for (int n = 0; n < K; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double kr = std::pow(10.0, users_[un].rician_K_dB / 10.0);
    const ComplexVector h_los = s.gamma[un] * s.H_tilde.row(n).adjoint();
    s.H.row(n) = rician_mix(h_los, kr, held_nlos_.row(n).transpose()).adjoint();
  }

  if (!held_beams_ || step_ % link_.beam_hold == 0)
    held_beams_ = select_beams(s.H_tilde, codebook_, link_.N_RF);
  s.F_RF = held_beams_->F_RF;
  s.beams = held_beams_->indices;
  s.H_eff = s.H_tilde * s.F_RF;
  s.H_hybrid = s.H * s.F_RF;
  s.rf_gram = s.F_RF.adjoint() * s.F_RF;
  ++step_;
  return s;
}

ChannelSnapshot snapshot(const OrbitParams& orbit, const LinkParams& link,
                         std::span<const UserTerminal> users, double t, RandomSource& rng) {
  ChannelProcess proc(orbit, link, std::vector<UserTerminal>(users.begin(), users.end()));
  return proc.next(t, rng);
}

}  // namespace leowb
