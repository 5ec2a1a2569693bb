#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <span>
#include <vector>

#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"

namespace mttsort {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementCovariance = Eigen::Matrix<double, 4, 4>;

/// 0.95 quantile of the chi-square distribution with 4 degrees of freedom.
inline constexpr double kChi2Gate4 = 9.4877;

struct GaussianState {
    StateVector mean;
    StateCovariance covariance;
};

/**
 * Constant-velocity Kalman filter over (cx, cy, a, h) and their velocities.
 *
 * Process and measurement noise are diagonal with standard deviations
 * proportional to the current box height, so uncertainty scales with the
 * apparent object size. Aspect ratio uses small fixed noise terms.
 */
class KalmanModel {
public:
    static constexpr int kStateDim = 8;
    static constexpr int kMeasurementDim = 4;

    explicit KalmanModel(double position_noise_weight = 1.0 / 20.0,
                         double velocity_noise_weight = 1.0 / 160.0)
        : std_position_(position_noise_weight), std_velocity_(velocity_noise_weight) {
        motion_.setIdentity();
        for (int i = 0; i < 4; ++i) motion_(i, 4 + i) = 1.0;
        observation_.setZero();
        for (int i = 0; i < 4; ++i) observation_(i, i) = 1.0;
    }

    const StateCovariance& transition() const { return motion_; }
    const Eigen::Matrix<double, 4, 8>& observation() const { return observation_; }
    double position_noise_weight() const { return std_position_; }
    double velocity_noise_weight() const { return std_velocity_; }

    GaussianState initiate(const MeasurementVector& z) const {
        if (!(z[2] > 0.0) || !(z[3] > 0.0)) {
            throw NumericalError("initiate: aspect ratio and height must be positive");
        }
        GaussianState s;
        s.mean << z, Eigen::Vector4d::Zero();
        const double h = z[3];
        StateVector std;
        std << 2 * std_position_ * h, 2 * std_position_ * h, 1e-2, 2 * std_position_ * h,
            10 * std_velocity_ * h, 10 * std_velocity_ * h, 1e-5, 10 * std_velocity_ * h;
        s.covariance = std.array().square().matrix().asDiagonal();
        return s;
    }

    StateCovariance process_noise(double h) const {
        StateVector std;
        std << std_position_ * h, std_position_ * h, 1e-2, std_position_ * h, std_velocity_ * h,
            std_velocity_ * h, 1e-5, std_velocity_ * h;
        return std.array().square().matrix().asDiagonal();
    }

    MeasurementCovariance measurement_noise(double h) const {
        MeasurementVector std;
        std << std_position_ * h, std_position_ * h, 1e-1, std_position_ * h;
        return std.array().square().matrix().asDiagonal();
    }

    GaussianState predict(const GaussianState& s) const {
        GaussianState out;
        out.mean = motion_ * s.mean;
        out.covariance = motion_ * s.covariance * motion_.transpose() + process_noise(s.mean[3]);
        symmetrize(out.covariance);
        return out;
    }

    /// Projected measurement distribution (mean, innovation covariance).
    std::pair<MeasurementVector, MeasurementCovariance> project(const GaussianState& s) const {
        MeasurementVector mean = observation_ * s.mean;
        MeasurementCovariance cov =
            observation_ * s.covariance * observation_.transpose() + measurement_noise(s.mean[3]);
        return {mean, cov};
    }

    /// Throws NumericalError when the innovation covariance is not positive definite.
    GaussianState update(const GaussianState& s, const MeasurementVector& z) const {
        const auto [projected_mean, projected_cov] = project(s);
        Eigen::LLT<MeasurementCovariance> chol(projected_cov);
        if (chol.info() != Eigen::Success) {
            throw NumericalError("update: innovation covariance is not positive definite");
        }
        // K = P H^T S^-1, solved as S K^T = H P.
        const Eigen::Matrix<double, 4, 8> hp = observation_ * s.covariance;
        const Eigen::Matrix<double, 8, 4> gain = chol.solve(hp).transpose();
        GaussianState out;
        out.mean = s.mean + gain * (z - projected_mean);
        out.covariance = s.covariance - gain * projected_cov * gain.transpose();
        symmetrize(out.covariance);
        return out;
    }

    /// Squared Mahalanobis distance of each measurement from the projected state.
    std::vector<double> gating_distance(const GaussianState& s,
                                        std::span<const MeasurementVector> measurements) const {
        const auto [projected_mean, projected_cov] = project(s);
        Eigen::LLT<MeasurementCovariance> chol(projected_cov);
        if (chol.info() != Eigen::Success) {
            throw NumericalError("gating_distance: projected covariance is not positive definite");
        }
        std::vector<double> out;
        out.reserve(measurements.size());
        for (const auto& z : measurements) {
            const MeasurementVector d = z - projected_mean;
            const MeasurementVector w = chol.matrixL().solve(d);
            out.push_back(w.squaredNorm());
        }
        return out;
    }

private:
    static void symmetrize(StateCovariance& p) { p = 0.5 * (p + p.transpose()).eval(); }

    double std_position_;
    double std_velocity_;
    StateCovariance motion_;
    Eigen::Matrix<double, 4, 8> observation_;
};

}  // namespace mttsort
