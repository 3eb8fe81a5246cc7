#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eigenspec/class_label.hpp"

namespace eigenspec {

// Fault locations that excite a characteristic impact frequency.
enum class FaultType { InnerRace, OuterRace, RollingElement };

// Characteristic fault frequencies of one bearing, expressed as dimensionless
// multiples of the shaft rotation frequency.
struct BearingSpec {
  std::string designation;
  double bpfi_mult = 0.0;  // ball passing frequency, inner race
  double bpfo_mult = 0.0;  // ball passing frequency, outer race
  double bsf_mult = 0.0;   // ball spin frequency

  // All multiples positive; BPFI exceeds BPFO on any real bearing.
  void validate() const;
};

// The SKF 22240 CCK/W33 bearing used for all simulated datasets.
BearingSpec skf22240();

// Parameters of the impulse-train fault model: periodic bursts of
// exponentially decaying sinusoids with uniformly jittered amplitudes.
struct FaultSimParams {
  FaultType fault_type = FaultType::RollingElement;
  double amplitude_mean = 1.0;
  double amplitude_jitter_frac = 0.10;  // A_j uniform in mean * [1-f, 1+f]
  double decay_beta_hz = 1200.0;
  double resonance_fn_hz = 2000.0;
  double shaft_speed_rpm = 1000.0;
  double sample_rate_hz = 12000.0;
  double duration_s = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Sampled vibration time series.
struct Signal {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  std::optional<ClassLabel> label;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  // Mean square of the samples.
  double power() const;
};

// Characteristic fault frequency in Hz for the given fault location. Rolling
// element envelopes are driven by twice the ball spin frequency, so
// RollingElement returns 2 x BSF x shaft frequency.
double fault_frequency(const BearingSpec& spec, FaultType fault,
                       double shaft_speed_rpm);

// Synthesizes the impulse-train fault signal: impulses at onsets j*T
// (j = 1..floor(duration/T)) each contributing
// A_j * exp(-beta * (t - jT)) * sin(2 pi f_n (t - jT)) for t > jT.
// Tails are never truncated. Identical (params, seed) give bit-identical
// output.
Signal simulate_fault_signal(const FaultSimParams& params,
                             const BearingSpec& spec);

// Reference against which the target SNR is interpreted.
//   Measured:  noise variance = measured signal power / 10^(snr/10)
//   UnitPower: noise variance = 1 / 10^(snr/10), i.e. the signal is assumed
//              to carry 0 dBW regardless of its actual level.
enum class NoiseReference { Measured, UnitPower };

// Adds i.i.d. zero-mean Gaussian noise at the requested SNR. With the
// Measured reference an all-zero input has no defined SNR and is an error.
Signal add_awgn(const Signal& sig, double snr_db, std::uint64_t rng_seed,
                NoiseReference reference = NoiseReference::Measured);

}  // namespace eigenspec
