#include "ofnav/motion_field.hpp"

#include <algorithm>
#include <cmath>

namespace ofnav {

InteractionMatrices interaction_matrices(const PixelPoint& p, const CameraIntrinsics& k) {
    const double x = p.x, y = p.y;
    InteractionMatrices m;
    m.translational << -k.fx, 0.0, x,  //
        0.0, -k.fy, y;
    m.rotational << x * y / k.fy, -(k.fx + x * x / k.fx), y,  //
        k.fy + y * y / k.fy, -x * y / k.fx, -x;
    return m;
}

FlowVector predict_flow(const PixelPoint& p, double inverse_depth, const CameraVelocity& v,
                        const AngularRates& w, const CameraIntrinsics& k) {
    const double x = p.x, y = p.y, d = inverse_depth;
    FlowVector f;
    f.u = (x * v.vz - k.fx * v.vx) * d - k.fx * w.q + w.r * y + w.p * x * y / k.fy -
          w.q * x * x / k.fx;
    f.v = (y * v.vz - k.fy * v.vy) * d + k.fy * w.p - w.r * x - w.q * x * y / k.fx +
          w.p * y * y / k.fy;
    return f;
}

EgomotionEstimate invert_linear(std::span<const FlowObservation> obs, const AngularRates& w,
                                const DepthModel& model, const CameraIntrinsics& k,
                                const InversionOptions& opt) {
    struct Row {
        const FlowObservation* o;
        double d;
    };
    std::vector<Row> usable;
    usable.reserve(obs.size());
    int dropped = 0;
    for (const FlowObservation& o : obs) {
        const InverseDepth d = inverse_depth(model, pixel_to_normalized(o.point, k));
        if (d.ok()) {
            usable.push_back({&o, d.value});
        } else {
            ++dropped;
        }
    }
    const int n = static_cast<int>(usable.size());
    if (n < 2) {
        throw InsufficientFeaturesError("invert_linear: need at least 2 usable observations, have " +
                                        std::to_string(n));
    }

    Eigen::MatrixXd a(2 * n, 3);
    Eigen::VectorXd c(2 * n);
    const Vec3 omega = w.vec();
    for (int i = 0; i < n; ++i) {
        const InteractionMatrices l = interaction_matrices(usable[i].o->point, k);
        a.middleRows<2>(2 * i) = usable[i].d * l.translational;
        const Eigen::Vector2d rot = l.rotational * omega;
        c(2 * i) = usable[i].o->flow.u - rot(0);
        c(2 * i + 1) = usable[i].o->flow.v - rot(1);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Vector3d sv = svd.singularValues();
    const double rank_tol = 2.0 * n * std::numeric_limits<double>::epsilon() * sv(0);
    if (!(sv(2) > rank_tol)) {
        throw RankDeficientError("invert_linear: stacked system has column rank < 3");
    }

    EgomotionEstimate est;
    const Eigen::Vector3d v = svd.solve(c);
    est.velocity = CameraVelocity::from_vec(v);
    est.n_features = n;
    est.n_dropped = dropped;
    est.residual_rms = (a * v - c).norm() / std::sqrt(2.0 * n);
    const double cond = sv(0) / sv(2);
    est.condition_ok = cond <= opt.condition_max && sv(0) > opt.min_gain;
    return est;
}

namespace detail {

bool slope_residual(std::span<const FlowObservation> obs, const AngularRates& w, double range,
                    const CameraIntrinsics& k, const Eigen::Matrix<double, 5, 1>& params,
                    Eigen::VectorXd& residual, Eigen::MatrixXd* jacobian) {
    const int n = static_cast<int>(obs.size());
    residual.resize(2 * n);
    if (jacobian != nullptr) {
        jacobian->resize(2 * n, 5);
    }
    const double alpha = params(3), beta = params(4);
    const double slope_sq = alpha * alpha + beta * beta;
    if (!(slope_sq < 1.0)) {
        return false;
    }
    const double gamma = std::sqrt(1.0 - slope_sq);
    const CameraVelocity v{params(0), params(1), params(2)};

    for (int i = 0; i < n; ++i) {
        const PixelPoint& p = obs[i].point;
        const NormalizedPoint nn = pixel_to_normalized(p, k);
        const double proj = alpha * nn.x + beta * nn.y;
        const double d = proj / (range * gamma) + 1.0 / range;
        if (!(d > 0.0)) {
            return false;
        }
        const FlowVector pred = predict_flow(p, d, v, w, k);
        residual(2 * i) = pred.u - obs[i].flow.u;
        residual(2 * i + 1) = pred.v - obs[i].flow.v;

        if (jacobian != nullptr) {
            const double su = p.x * v.vz - k.fx * v.vx;  // d-multipliers of Eq-of-motion rows
            const double sv = p.y * v.vz - k.fy * v.vy;
            const double g3 = gamma * gamma * gamma;
            const double dd_da = nn.x / (range * gamma) + proj * alpha / (range * g3);
            const double dd_db = nn.y / (range * gamma) + proj * beta / (range * g3);
            (*jacobian)(2 * i, 0) = -k.fx * d;
            (*jacobian)(2 * i, 1) = 0.0;
            (*jacobian)(2 * i, 2) = p.x * d;
            (*jacobian)(2 * i, 3) = su * dd_da;
            (*jacobian)(2 * i, 4) = su * dd_db;
            (*jacobian)(2 * i + 1, 0) = 0.0;
            (*jacobian)(2 * i + 1, 1) = -k.fy * d;
            (*jacobian)(2 * i + 1, 2) = p.y * d;
            (*jacobian)(2 * i + 1, 3) = sv * dd_da;
            (*jacobian)(2 * i + 1, 4) = sv * dd_db;
        }
    }
    return true;
}

}  // namespace detail

EgomotionEstimate invert_slope(std::span<const FlowObservation> obs, const AngularRates& w,
                               double range, const CameraIntrinsics& k, const SlopeInit& init,
                               const InversionOptions& opt) {
    const int n = static_cast<int>(obs.size());
    if (n < 3) {
        throw InsufficientFeaturesError("invert_slope: need at least 3 observations, have " +
                                        std::to_string(n));
    }
    if (!(range > 0.0)) {
        throw std::invalid_argument("invert_slope: range must be positive");
    }

    const double bound = 1.0 - opt.slope_bound_margin;
    auto clamp_slope = [bound](Eigen::Matrix<double, 5, 1>& x) {
        const double s = x(3) * x(3) + x(4) * x(4);
        if (s > bound) {
            const double scale = std::sqrt(bound / s);
            x(3) *= scale;
            x(4) *= scale;
        }
    };

    Eigen::Matrix<double, 5, 1> x;
    x << init.velocity.vx, init.velocity.vy, init.velocity.vz, init.alpha, init.beta;
    clamp_slope(x);

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    if (!detail::slope_residual(obs, w, range, k, x, r, &jac)) {
        // Depths invalid at the initial guess; restart from zero slope.
        x(3) = 0.0;
        x(4) = 0.0;
        if (!detail::slope_residual(obs, w, range, k, x, r, &jac)) {
            throw std::invalid_argument("invert_slope: invalid initial state");
        }
    }

    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    for (; iter < opt.max_iterations && !converged; ++iter) {
        const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
        const Eigen::Matrix<double, 5, 1> jtr = jac.transpose() * r;

        bool accepted = false;
        while (!accepted && lambda < 1e14) {
            Eigen::Matrix<double, 5, 5> damped = jtj;
            for (int i = 0; i < 5; ++i) {
                damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
            }
            const Eigen::Matrix<double, 5, 1> step = damped.ldlt().solve(-jtr);
            Eigen::Matrix<double, 5, 1> x_new = x + step;
            clamp_slope(x_new);

            // When the bound truncates the slope move, the joint step's
            // velocity component is no longer optimal; retry with the slope
            // frozen and keep the better candidate.
            const double clamp_shift = std::hypot(x(3) + step(3) - x_new(3), x(4) + step(4) - x_new(4));
            if (clamp_shift > 1e-15) {
                Eigen::Matrix<double, 5, 1> reduced = x;
                reduced(3) = x_new(3);
                reduced(4) = x_new(4);
                const Eigen::Matrix<double, 3, 3> vblock = damped.topLeftCorner<3, 3>();
                const Eigen::Matrix<double, 3, 1> vstep = vblock.ldlt().solve(-jtr.head<3>());
                reduced.head<3>() += vstep;
                Eigen::VectorXd r_red;
                if (detail::slope_residual(obs, w, range, k, reduced, r_red, nullptr) &&
                    r_red.squaredNorm() < cost) {
                    Eigen::VectorXd r_full;
                    const bool full_valid =
                        detail::slope_residual(obs, w, range, k, x_new, r_full, nullptr);
                    if (!full_valid || r_red.squaredNorm() < r_full.squaredNorm()) {
                        x_new = reduced;
                    }
                }
            }

            Eigen::VectorXd r_new;
            Eigen::MatrixXd jac_new;
            const bool valid = detail::slope_residual(obs, w, range, k, x_new, r_new, &jac_new);
            const double cost_new = valid ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();

            if (cost_new <= cost) {
                const double decrease = (cost - cost_new) / std::max(cost, 1e-300);
                const double step_norm = (x_new - x).norm();
                x = x_new;
                r.swap(r_new);
                jac.swap(jac_new);
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (step_norm < opt.step_tolerance || decrease < opt.decrease_tolerance) {
                    converged = true;
                }
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) {
            break;  // damping saturated; no further progress possible
        }
    }

    EgomotionEstimate est;
    est.velocity = {x(0), x(1), x(2)};
    est.slope = SlopeEstimate{x(3), x(4)};
    est.residual_rms = std::sqrt(cost / (2.0 * n));
    est.n_features = n;
    est.converged = converged;
    est.iterations = iter;

    // Condition check on the Gauss-Newton system at the solution.
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    est.condition_ok = smin > 0.0 && sv(0) / smin <= opt.condition_max && sv(0) > opt.min_gain;
    return est;
}

double relative_velocity_error(const CameraVelocity& estimate, const CameraVelocity& truth) {
    const double t = truth.vec().norm();
    if (!(t > 0.0)) {
        throw std::domain_error("relative_velocity_error: ground-truth velocity is zero");
    }
    return (estimate.vec() - truth.vec()).norm() / t;
}

double absolute_velocity_error(const CameraVelocity& estimate, const CameraVelocity& truth) {
    return (estimate.vec() - truth.vec()).norm();
}

}  // namespace ofnav
