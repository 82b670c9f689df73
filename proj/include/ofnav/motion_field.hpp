#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ofnav/depth_model.hpp"

namespace ofnav {

/// Image-plane velocity (px/s).
struct FlowVector {
    double u = 0.0;
    double v = 0.0;
};

/// One tracked feature: position plus measured flow.
struct FlowObservation {
    PixelPoint point;
    FlowVector flow;
};

/// Translational velocity in the camera frame (m/s).
struct CameraVelocity {
    double vx = 0.0;
    double vy = 0.0;
    double vz = 0.0;

    Vec3 vec() const { return {vx, vy, vz}; }
    static CameraVelocity from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// The 2x3 maps from translational / rotational velocity to image flow at a
/// pixel. The translational block is scaled by the inverse depth when stacked.
struct InteractionMatrices {
    Eigen::Matrix<double, 2, 3> translational;
    Eigen::Matrix<double, 2, 3> rotational;
};

InteractionMatrices interaction_matrices(const PixelPoint& p, const CameraIntrinsics& k);

/// Forward motion-field prediction at one pixel.
FlowVector predict_flow(const PixelPoint& p, double inverse_depth, const CameraVelocity& v,
                        const AngularRates& w, const CameraIntrinsics& k);

struct SlopeEstimate {
    double alpha = 0.0;
    double beta = 0.0;
};

struct EgomotionEstimate {
    CameraVelocity velocity;
    std::optional<SlopeEstimate> slope;
    double residual_rms = 0.0;  // px/s
    int n_features = 0;         // observations used in the solve
    int n_dropped = 0;          // observations whose ray missed the depth model
    bool condition_ok = true;
    bool converged = true;  // always true on the linear path
    int iterations = 0;
};

struct InversionOptions {
    double condition_max = 1e8;
    double min_gain = 1e-12;  // smallest acceptable top singular value of A
    // nonlinear (slope) solver
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    double decrease_tolerance = 1e-12;
    double slope_bound_margin = 1e-9;  // keeps alpha^2 + beta^2 <= 1 - margin
};

/// Least-squares solve of the stacked flow constraints for the translational
/// velocity, with the angular contribution removed using the known rates.
/// Throws InsufficientFeaturesError (< 2 usable) or RankDeficientError.
EgomotionEstimate invert_linear(std::span<const FlowObservation> obs, const AngularRates& w,
                                const DepthModel& model, const CameraIntrinsics& k,
                                const InversionOptions& opt = {});

struct SlopeInit {
    CameraVelocity velocity;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Joint estimation of velocity and plane inclination (five unknowns) by
/// damped trust-region least squares with an analytic Jacobian. Needs >= 3
/// observations. Non-convergence is reported through the `converged` flag.
EgomotionEstimate invert_slope(std::span<const FlowObservation> obs, const AngularRates& w,
                               double range, const CameraIntrinsics& k, const SlopeInit& init = {},
                               const InversionOptions& opt = {});

/// ||est - truth|| / ||truth||. Throws std::domain_error when ||truth|| = 0.
double relative_velocity_error(const CameraVelocity& estimate, const CameraVelocity& truth);

/// ||est - truth||.
double absolute_velocity_error(const CameraVelocity& estimate, const CameraVelocity& truth);

namespace detail {

// Residuals and Jacobian of the slope-model flow prediction, exposed for the
// finite-difference checks in the test suite. Parameter order:
// (vx, vy, vz, alpha, beta). Returns false if any depth is non-positive.
bool slope_residual(std::span<const FlowObservation> obs, const AngularRates& w, double range,
                    const CameraIntrinsics& k, const Eigen::Matrix<double, 5, 1>& params,
                    Eigen::VectorXd& residual, Eigen::MatrixXd* jacobian);

}  // namespace detail

}  // namespace ofnav
