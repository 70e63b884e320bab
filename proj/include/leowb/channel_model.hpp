// leowb/channel_model.hpp
//
// Time-varying LEO downlink channel: circular-orbit pass geometry over a
// spherical Earth, planar-array manifold, Rician mixing, and analog beam
// selection from a 2-D DFT codebook.
//
// Row convention: row n of H is h_n^H, so UT n receives y_n = h_n^H x =
// H.row(n) * x. H_tilde rows are a_n^H for the manifold a_n.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "leowb/random.hpp"
#include "leowb/types.hpp"

namespace leowb {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kEarthRadius = 6371e3;
inline constexpr double kEarthMu = 3.986004418e14;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPi = 3.14159265358979323846;

inline double wavelength(double carrier_Hz) { return kSpeedOfLight / carrier_Hz; }

struct ArrayGeometry {
  int n_x = 0;
  int n_y = 0;
  double spacing_wl = 0.5;  ///< element spacing in wavelengths
  /// Element positions in meters, element m = ix * n_y + iy.
  std::vector<Eigen::Vector3d> element_positions;
  /// False for arbitrary element layouts (no DFT codebook).
  bool is_grid = true;

  int num_elements() const { return static_cast<int>(element_positions.size()); }

  /// n_x x n_y grid in the z = 0 plane, centred on the origin.
  static ArrayGeometry uniform_planar(int n_x, int n_y, double spacing_wl, double wavelength_m);
  static ArrayGeometry custom(std::vector<Eigen::Vector3d> positions);
};

struct GeodeticPosition {
  double lat_rad = 0.0;
  double lon_rad = 0.0;
  double alt_m = 0.0;
};

struct UserTerminal {
  GeodeticPosition position;
  double antenna_gain_dBi = 39.7;
  double rician_K_dB = 10.0;
  double noise_variance = 0.0;  ///< watts
};

Eigen::Vector3d to_ecef(const GeodeticPosition& p);

/// Direction cosines of the array frame at time t: the array faces nadir
/// (z), x follows the velocity, y = z x x.
struct ArrayFrame {
  Eigen::Vector3d x, y, z;
};

struct OrbitParams {
  double altitude_m = 600e3;
  double pass_s = 120.0;
  double min_elevation_deg = 10.0;
  /// Ground-track point overflown at pass_s / 2.
  GeodeticPosition centroid{};
};

struct OrbitState {
  double altitude_m = 0.0;
  double time_s = 0.0;
  Eigen::Vector3d satellite_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d satellite_velocity = Eigen::Vector3d::Zero();
  ArrayFrame frame;
  std::vector<double> theta;        ///< off-boresight angle per UT, rad
  std::vector<double> phi;          ///< azimuth in the array frame per UT, rad
  std::vector<double> slant_range;  ///< m
  std::vector<double> elevation;    ///< elevation of the satellite seen from each UT, rad
};

/// sqrt(mu / (R_E + h)).
double orbital_speed(double altitude_m);

/// Satellite state and per-UT angles at time t. Throws BelowMinElevation if a
/// UT sits below the elevation mask and InvalidArgument if t is outside the pass.
OrbitState propagate_pass(const OrbitParams& orbit, std::span<const UserTerminal> users, double t);

/// Places `count` UTs uniformly over a spherical-cap disk of the given ground
/// radius around `center`.
std::vector<GeodeticPosition> place_users_uniform_disk(const GeodeticPosition& center,
                                                       double radius_m, int count,
                                                       RandomSource& rng);

/// Unit-norm steering vector for off-boresight angle theta and azimuth phi.
ComplexVector array_manifold(double theta, double phi, const ArrayGeometry& geom,
                             double wavelength_m);

/// Rician mixture sqrt(K/(K+1)) h_los + sqrt(1/(K+1)) h_nlos. The NLOS part is
/// i.i.d. CN with total expected power ||h_los||^2. K_R is capped at 1e12.
ComplexVector rician_channel(const ComplexVector& h_los, double K_R_linear, RandomSource& rng);

/// Same mixture with a caller-supplied unit-variance NLOS draw (for block fading).
ComplexVector rician_mix(const ComplexVector& h_los, double K_R_linear,
                         const ComplexVector& unit_nlos);

/// 20 log10(4 pi d / lambda).
double free_space_path_loss_dB(double distance_m, double carrier_Hz);

/// Amplitude gain gamma_n = sqrt(G_UT / FSPL / L_atm).
double los_gain(double slant_range_m, double carrier_Hz, const UserTerminal& ut,
                double extra_loss_dB = 0.0);

/// Critically sampled 2-D DFT beam set of a uniform planar array. Codeword
/// b = bx * n_y + by is the Kronecker product of per-axis DFT vectors.
class DftCodebook {
 public:
  DftCodebook(int n_x, int n_y);

  int size() const { return n_x_ * n_y_; }
  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }

  ComplexVector codeword(int b) const;
  /// All codewords as columns, N_t x N_t.
  const ComplexMatrix& matrix() const { return full_; }

  /// |H.row(n) * c_b|^2 = |h_n^H c_b|^2 for every UT n and codeword b (K x N_t), evaluated with
  /// the separable per-axis transform.
  Eigen::MatrixXd beam_powers(const ComplexMatrix& H_tilde) const;

 private:
  int n_x_, n_y_;
  ComplexMatrix dx_, dy_;  // per-axis DFT matrices, columns are codewords
  ComplexMatrix full_;
};

/// Throws UnsupportedGeometry for non-grid arrays.
DftCodebook dft_codebook(const ArrayGeometry& geom);

struct BeamSelection {
  ComplexMatrix F_RF;        ///< N_t x N_RF
  std::vector<int> indices;  ///< codeword index per RF chain; first K belong to UTs in order
};

/// Best-power analog beam per UT. Ties go to the lowest codeword index; a UT
/// whose best codeword is already taken gets its next-best unused one. RF
/// chains beyond K take the unused codewords with the largest total power.
BeamSelection select_beams(const ComplexMatrix& H_tilde, const DftCodebook& codebook, int N_RF);

/// As above with precomputed K x N_t beam powers.
BeamSelection select_beams_from_powers(const Eigen::MatrixXd& powers, const DftCodebook& codebook,
                                       int N_RF);

struct ChannelSnapshot {
  double timestamp_s = 0.0;
  ComplexMatrix H;        ///< K x N_t full channel
  ComplexMatrix H_tilde;  ///< K x N_t unit-norm manifold rows
  ComplexMatrix F_RF;     ///< N_t x N_RF
  ComplexMatrix H_eff;    ///< H_tilde * F_RF
  ComplexMatrix H_hybrid; ///< H * F_RF
  ComplexMatrix rf_gram;  ///< F_RF^H F_RF
  std::vector<int> beams;
  std::vector<double> gamma;  ///< LOS amplitude gain per UT
  OrbitState orbit;
};

/// Static description of the radio link used to build snapshots.
struct LinkParams {
  double carrier_Hz = 18e9;
  ArrayGeometry array;
  int N_RF = 16;
  double atmospheric_loss_dB = 0.0;
  /// NLOS draws held for this many consecutive snapshots.
  int nlos_block = 1;
  /// Analog beams re-selected every this many snapshots.
  int beam_hold = 1;
};

/// Stateful snapshot generator for one pass. It keeps the NLOS draw and the
/// analog beams alive across snapshots when block fading or beam hold is
/// configured; randomness comes only from the RandomSource handed to next().
class ChannelProcess {
 public:
  ChannelProcess(OrbitParams orbit, LinkParams link, std::vector<UserTerminal> users);

  ChannelSnapshot next(double t, RandomSource& rng);

  const std::vector<UserTerminal>& users() const { return users_; }
  const DftCodebook& codebook() const { return codebook_; }

 private:
  OrbitParams orbit_;
  LinkParams link_;
  std::vector<UserTerminal> users_;
  DftCodebook codebook_;
  double wavelength_;
  long long step_ = 0;
  ComplexMatrix held_nlos_;  // unit-variance draws, K x N_t
  std::optional<BeamSelection> held_beams_;
};

/// One-off snapshot at time t (no block fading, fresh beam selection).
ChannelSnapshot snapshot(const OrbitParams& orbit, const LinkParams& link,
                         std::span<const UserTerminal> users, double t, RandomSource& rng);

}  // namespace leowb
