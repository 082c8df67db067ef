#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace ergmmd {

/// Time-indexed states and controls over a horizon T (one column per step).
/// Controls have the same length as states; the last control is a padding
/// slot, conventionally zero.
struct Trajectory {
  Eigen::MatrixXd states;    // n x T
  Eigen::MatrixXd controls;  // m x T
  double dt = 1.0;

  int horizon() const { return static_cast<int>(states.cols()); }
  int state_dim() const { return static_cast<int>(states.rows()); }
  int control_dim() const { return static_cast<int>(controls.rows()); }

  void validate() const {
    if (states.cols() < 1) throw std::invalid_argument("trajectory: horizon must be >= 1");
    if (controls.cols() != states.cols())
      throw std::invalid_argument("trajectory: controls length must equal states length");
    if (!states.allFinite() || !controls.allFinite())
      throw std::invalid_argument("trajectory: non-finite entries");
    if (!(dt > 0.0)) throw std::invalid_argument("trajectory: dt must be positive");
  }
};

}  // namespace ergmmd
