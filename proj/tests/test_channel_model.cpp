#include <doctest.h>

#include <set>

#include "leowb/channel_model.hpp"
#include "oracles.hpp"

using namespace leowb;

namespace {

constexpr double kDeg = kPi / 180.0;

UserTerminal ut_at(double lat_deg, double lon_deg) {
  UserTerminal u;
  u.position = {lat_deg * kDeg, lon_deg * kDeg, 0.0};
  u.noise_variance = 1e-13;
  return u;
}

LinkParams link(int nx, int ny, int n_rf) {
  LinkParams l;
  l.carrier_Hz = 18e9;
  l.array = ArrayGeometry::uniform_planar(nx, ny, 0.5, wavelength(18e9));
  l.N_RF = n_rf;
  return l;
}

}  // namespace

TEST_CASE("array manifold") {
  const double lam = wavelength(18e9);
  const ArrayGeometry g = ArrayGeometry::uniform_planar(4, 4, 0.5, lam);

  SUBCASE("boresight has equal phases") {
    const ComplexVector a = array_manifold(0.0, 1.234, g, lam);
    CHECK((a - ComplexVector::Constant(16, 0.25)).norm() < 1e-15);
  }
  SUBCASE("single element") {
    const ArrayGeometry one = ArrayGeometry::uniform_planar(1, 1, 0.5, lam);
    const ComplexVector a = array_manifold(0.7, 0.2, one, lam);
    REQUIRE(a.size() == 1);
    CHECK(std::abs(a(0) - Complex(1.0)) < 1e-15);
  }
  SUBCASE("scalar phase oracle at 30 and 45 degrees") {
    const ComplexVector a = array_manifold(30 * kDeg, 45 * kDeg, g, lam);
    CHECK((a - oracle::scalar_manifold(30 * kDeg, 45 * kDeg, 4, 4, 0.5)).norm() < 1e-12);
  }
  SUBCASE("unit norm everywhere") {
    RandomSource rng(4);
    const ArrayGeometry big = ArrayGeometry::uniform_planar(16, 16, 0.5, lam);
    for (int i = 0; i < 200; ++i) {
      const double th = rng.uniform() * kPi / 2, ph = rng.uniform() * 2 * kPi;
      CHECK(std::abs(array_manifold(th, ph, big, lam).norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("geometry validation") {
    CHECK_THROWS_AS(ArrayGeometry::uniform_planar(0, 4, 0.5, lam), InvalidArgument);
    CHECK_THROWS_AS(ArrayGeometry::uniform_planar(4, 4, 0.0, lam), InvalidArgument);
  }
}

TEST_CASE("rician mixture") {
  RandomSource rng(10);
  const double lam = wavelength(18e9);
  const ArrayGeometry g = ArrayGeometry::uniform_planar(4, 4, 0.5, lam);
  const ComplexVector h_los = 3e-7 * array_manifold(0.3, 0.5, g, lam);
  const double los_power = h_los.squaredNorm();

  SUBCASE("pure LOS limit") {
    const ComplexVector h = rician_channel(h_los, 1e30, rng);
    CHECK((h - h_los).norm() / h_los.norm() < 1e-5);
  }
  SUBCASE("pure NLOS power") {
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) acc += rician_channel(h_los, 0.0, rng).squaredNorm();
    CHECK(std::abs(acc / 10000 / los_power - 1.0) < 0.05);
  }
  SUBCASE("K_R = 10 dB power split") {
    const double kr = 10.0;
    const double los_share = std::sqrt(kr / (kr + 1));
    double nlos = 0.0, total = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const ComplexVector h = rician_channel(h_los, kr, rng);
      nlos += (h - los_share * h_los).squaredNorm();
      total += h.squaredNorm();
    }
    const double ratio_dB = 10 * std::log10(los_share * los_share * los_power * 10000 / nlos);
    CHECK(std::abs(ratio_dB - 10.0) < 0.5);
    CHECK(std::abs(total / 10000 / los_power - 1.0) < 0.05);
  }
  SUBCASE("negative K_R rejected") { CHECK_THROWS_AS(rician_channel(h_los, -1.0, rng), InvalidArgument); }
}

TEST_CASE("free-space path loss") {
  const double lam = wavelength(18e9);
  CHECK(std::abs(free_space_path_loss_dB(lam / (4 * kPi), 18e9)) < 1e-12);
  CHECK(free_space_path_loss_dB(600e3, 18e9) == doctest::Approx(173.1).epsilon(0.1 / 173.1));
  CHECK(free_space_path_loss_dB(1200e3, 18e9) - free_space_path_loss_dB(600e3, 18e9) ==
        doctest::Approx(20 * std::log10(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(free_space_path_loss_dB(0.0, 18e9), InvalidArgument);

  UserTerminal u = ut_at(0, 0);
  u.antenna_gain_dBi = 39.7;
  const double g = los_gain(600e3, 18e9, u, 1.5);
  CHECK(20 * std::log10(g) == doctest::Approx(39.7 - free_space_path_loss_dB(600e3, 18e9) - 1.5));
}

TEST_CASE("DFT codebook") {
  SUBCASE("2-point") {
    const DftCodebook cb(2, 1);
    const double s = 1 / std::sqrt(2.0);
    CHECK((cb.codeword(0) - ComplexVector::Constant(2, s)).norm() < 1e-15);
    ComplexVector c1(2);
    c1 << s, -s;
    CHECK((cb.codeword(1) - c1).norm() < 1e-15);
  }
  SUBCASE("16x16 is orthonormal and matches the definition") {
    const DftCodebook cb(16, 16);
    CHECK(cb.size() == 256);
    const ComplexMatrix& M = cb.matrix();
    CHECK((M.adjoint() * M - ComplexMatrix::Identity(256, 256)).norm() < 1e-10);
    for (int b : {0, 1, 17, 100, 255}) CHECK((cb.codeword(b) - oracle::dft_codeword(b, 16, 16)).norm() < 1e-12);
    for (int b = 0; b < 256; ++b) CHECK(std::abs(cb.codeword(b).norm() - 1.0) < 1e-12);
  }
  SUBCASE("separable beam powers match direct products") {
    RandomSource rng(3);
    const DftCodebook cb(4, 8);
    const ComplexMatrix H = oracle::gaussian(5, 32, rng);
    const Eigen::MatrixXd P = cb.beam_powers(H);
    for (int n = 0; n < 5; ++n)
      for (int b = 0; b < 32; ++b)
        CHECK(P(n, b) == doctest::Approx(oracle::beam_power(H, n, oracle::dft_codeword(b, 4, 8))).epsilon(1e-12));
  }
  SUBCASE("non-grid array") {
    std::vector<Eigen::Vector3d> pos{{0, 0, 0}, {0.01, 0.003, 0}, {0.02, 0, 0}};
    CHECK_THROWS_AS(dft_codebook(ArrayGeometry::custom(pos)), UnsupportedGeometry);
  }
}

TEST_CASE("beam selection") {
  const DftCodebook cb(4, 4);

  SUBCASE("channel equal to a codeword") {
    ComplexMatrix H(1, 16);
    H.row(0) = cb.codeword(7).adjoint();  // h_1 = c_7
    const BeamSelection sel = select_beams(H, cb, 1);
    CHECK(sel.indices.front() == 7);
    CHECK((sel.F_RF.col(0) - cb.codeword(7)).norm() == 0.0);
  }
  SUBCASE("identical channels collide") {
    RandomSource rng(2);
    ComplexMatrix H(2, 16);
    H.row(0) = oracle::gaussian(1, 16, rng);
    H.row(1) = H.row(0);
    const BeamSelection sel = select_beams(H, cb, 2);
    const Eigen::MatrixXd P = cb.beam_powers(H);
    std::vector<std::pair<double, int>> order;
    for (int b = 0; b < 16; ++b) order.push_back({-P(0, b), b});
    std::sort(order.begin(), order.end());
    CHECK(sel.indices[0] == order[0].second);
    CHECK(sel.indices[1] == order[1].second);
  }
  SUBCASE("exhaustive search oracle") {
    RandomSource rng(8);
    const DftCodebook big(8, 8);
    for (int trial = 0; trial < 20; ++trial) {
      const ComplexMatrix H = oracle::gaussian(4, 64, rng);
      const BeamSelection sel = select_beams(H, big, 6);
      const std::vector<int> ref = oracle::exhaustive_assignment(H, 8, 8);
      for (int n = 0; n < 4; ++n) {
        const double got = oracle::beam_power(H, n, oracle::dft_codeword(sel.indices[static_cast<std::size_t>(n)], 8, 8));
        const double want = oracle::beam_power(H, n, oracle::dft_codeword(ref[static_cast<std::size_t>(n)], 8, 8));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
      CHECK(sel.F_RF.cols() == 6);
      CHECK(std::set<int>(sel.indices.begin(), sel.indices.end()).size() == 6);
    }
  }
  SUBCASE("N_RF bounds") {
    const ComplexMatrix H = ComplexMatrix::Ones(3, 16);
    CHECK_THROWS_AS(select_beams(H, cb, 2), InvalidArgument);
    CHECK_THROWS_AS(select_beams(H, cb, 17), InvalidArgument);
  }
}

TEST_CASE("orbit geometry") {
  OrbitParams orbit;
  const std::vector<UserTerminal> centre{ut_at(0, 0)};

  SUBCASE("overhead at mid-pass") {
    const OrbitState st = propagate_pass(orbit, centre, 60.0);
    CHECK(st.theta[0] < 1e-9);
    CHECK(st.slant_range[0] == doctest::Approx(600e3).epsilon(1e-9));
    CHECK(st.elevation[0] == doctest::Approx(kPi / 2).epsilon(1e-9));
  }
  SUBCASE("orbital speed") { CHECK(std::abs(orbital_speed(600e3) - 7.56e3) < 10.0); }
  SUBCASE("angles are continuous and ranges exceed the altitude") {
    const std::vector<UserTerminal> users{ut_at(0.5, 0.3), ut_at(-1.0, 1.2), ut_at(1.5, -0.8)};
    OrbitState prev = propagate_pass(orbit, users, 0.0);
    for (int i = 1; i <= 2400; ++i) {
      const OrbitState st = propagate_pass(orbit, users, i * 0.05);
      for (std::size_t n = 0; n < users.size(); ++n) {
        CHECK(std::abs(st.theta[n] - prev.theta[n]) < 2e-3);
        CHECK(st.slant_range[n] >= orbit.altitude_m);
      }
      prev = st;
    }
  }
  SUBCASE("velocity is perpendicular to position") {
    const OrbitState st = propagate_pass(orbit, centre, 13.0);
    CHECK(std::abs(st.satellite_position.dot(st.satellite_velocity)) < 1e-6 * st.satellite_position.norm() * st.satellite_velocity.norm());
    CHECK(st.satellite_velocity.norm() == doctest::Approx(orbital_speed(600e3)));
  }
  SUBCASE("elevation mask") {
    const std::vector<UserTerminal> far{ut_at(0, 25)};
    CHECK_THROWS_AS(propagate_pass(orbit, far, 60.0), BelowMinElevation);
    CHECK_THROWS_AS(propagate_pass(orbit, centre, 121.0), InvalidArgument);
  }
}

TEST_CASE("uniform disk placement") {
  RandomSource rng(12);
  const GeodeticPosition c{0.1, 0.2, 0.0};
  const auto pts = place_users_uniform_disk(c, 250e3, 4000, rng);
  const Eigen::Vector3d ch = to_ecef(c).normalized();
  int inner = 0;
  for (const auto& p : pts) {
    const double ground = kEarthRadius * std::acos(std::clamp(to_ecef(p).normalized().dot(ch), -1.0, 1.0));
    CHECK(ground <= 250e3 * (1 + 1e-9));
    inner += ground <= 250e3 / std::sqrt(2.0);
  }
  // half the area lies inside radius R / sqrt(2)
  CHECK(std::abs(inner / 4000.0 - 0.5) < 0.03);
}

TEST_CASE("snapshot assembly") {
  RandomSource rng(21);
  OrbitParams orbit;

  SUBCASE("single LOS UT at nadir") {
    UserTerminal u = ut_at(0, 0);
    u.rician_K_dB = 120.0;
    const std::vector<UserTerminal> users{u};
    const ChannelSnapshot s = snapshot(orbit, link(16, 16, 1), users, 60.0, rng);
    const double gamma = s.gamma[0];
    CHECK(gamma == doctest::Approx(los_gain(600e3, 18e9, u)).epsilon(1e-9));
    // boresight manifold is codeword 0
    CHECK(s.beams[0] == 0);
    CHECK(std::abs(s.H_eff(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs((s.H * s.F_RF)(0, 0)) == doctest::Approx(gamma).epsilon(1e-5));
  }

  SUBCASE("row invariants") {
    std::vector<UserTerminal> users{ut_at(0.4, 0.1), ut_at(0.4, 0.1), ut_at(-0.6, 0.9), ut_at(1.0, -1.0)};
    const ChannelSnapshot s = snapshot(orbit, link(8, 8, 6), users, 30.0, rng);
    CHECK((s.H_tilde.row(0) - s.H_tilde.row(1)).norm() == 0.0);
    for (int n = 0; n < 4; ++n) CHECK(std::abs(s.H_tilde.row(n).norm() - 1.0) < 1e-12);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(s.F_RF.col(j).norm() - 1.0) < 1e-12);
    CHECK(s.H_eff == s.H_tilde * s.F_RF);
    CHECK((s.H_hybrid - s.H * s.F_RF).norm() <= 1e-14 * s.H_hybrid.norm());
    CHECK((s.rf_gram - ComplexMatrix::Identity(6, 6)).norm() < 1e-12);
    CHECK(s.H_tilde.rows() == 4);
    CHECK(s.H.cols() == 64);
  }

  SUBCASE("LOS part is deterministic, NLOS comes from the supplied source") {
    std::vector<UserTerminal> users{ut_at(0.4, 0.1), ut_at(-0.6, 0.9)};
    RandomSource a(5), b(5);
    const ChannelSnapshot s1 = snapshot(orbit, link(8, 8, 2), users, 42.0, a);
    const ChannelSnapshot s2 = snapshot(orbit, link(8, 8, 2), users, 42.0, b);
    CHECK(s1.H == s2.H);
    CHECK(s1.H_eff == s2.H_eff);
  }
}

TEST_CASE("channel process block fading and beam hold") {
  std::vector<UserTerminal> users{ut_at(0.4, 0.1), ut_at(-0.6, 0.9)};
  LinkParams l = link(8, 8, 2);
  l.nlos_block = 3;
  l.beam_hold = 1000;
  ChannelProcess proc(OrbitParams{}, l, users);
  RandomSource rng(1);
  const ChannelSnapshot s0 = proc.next(0.0, rng);
  const ChannelSnapshot s1 = proc.next(0.05, rng);
  const ChannelSnapshot s3 = proc.next(0.10, rng);
  CHECK(s0.beams == s1.beams);
  CHECK(s0.beams == s3.beams);
  // NLOS share identical within the block: H - LOS part depends only on gamma
  const auto nlos = [](const ChannelSnapshot& s, int n) -> ComplexVector {
    const double kr = std::pow(10.0, 1.0);
    const ComplexVector los = std::sqrt(kr / (kr + 1)) * s.gamma[static_cast<std::size_t>(n)] * s.H_tilde.row(n).adjoint();
    return ComplexVector(s.H.row(n).adjoint() - los) / s.gamma[static_cast<std::size_t>(n)];
  };
  CHECK((nlos(s0, 0) - nlos(s1, 0)).norm() < 1e-9);
  CHECK_THROWS_AS(ChannelProcess(OrbitParams{}, l, {}), InvalidArgument);
}
