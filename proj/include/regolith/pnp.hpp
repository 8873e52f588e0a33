#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "regolith/camera.hpp"
#include "regolith/geometry.hpp"
#include "regolith/rng.hpp"

namespace regolith {

/// Station frame -> camera frame transform recovered by PnP, with the RANSAC
/// inlier set, the post-refinement reprojection RMS, and the Gauss-Newton
/// information matrix (J^T J) used for covariance propagation downstream.
struct RelativePose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::vector<int> inlier_ids;
    double reprojection_rms = 0.0;
    bool refined = false;
    Eigen::Matrix<double, 6, 6> information = Eigen::Matrix<double, 6, 6>::Identity();

    Iso3 transform() const {
        Iso3 t = Iso3::Identity();
        t.linear() = rotation;
        t.translation() = translation;
        return t;
    }
};

enum class PnpFailure { none, insufficient_correspondences, no_consensus };

struct PnpResult {
    PnpFailure failure = PnpFailure::none;
    RelativePose pose;

    bool ok() const { return failure == PnpFailure::none; }
};

struct RansacConfig {
    double inlier_threshold_px = 2.0;
    int max_iterations = 500;
    int min_consensus = 8;
    double confidence = 0.99;
};

namespace detail {

inline Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m) {
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Eigen::Matrix3d u = svd.matrixU();
        u.col(2) *= -1.0;
        r = u * svd.matrixV().transpose();
    }
    return r;
}

inline double reprojection_error(const CameraModel& cam, const Eigen::Matrix3d& r,
                                 const Eigen::Vector3d& t, const Correspondence& c) {
    const Eigen::Vector3d p = r * c.model + t;
    if (p.z() <= 1e-6)
        return 1e18;
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    const double v = cam.fy * p.y() / p.z() + cam.cy;
    return std::hypot(u - c.image.x, v - c.image.y);
}

/// Real roots of a polynomial (coefficients highest-degree first) via the
/// companion-matrix eigenvalues, after stripping negligible leading terms.
inline std::vector<double> real_roots(std::vector<double> coeffs) {
    const double scale = std::max({std::abs(coeffs[0]), std::abs(coeffs.back()), 1e-30});
    while (coeffs.size() > 1 && std::abs(coeffs.front()) < 1e-12 * scale)
        coeffs.erase(coeffs.begin());
    const int degree = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> roots;
    if (degree < 1)
        return roots;
    if (degree == 1) {
        roots.push_back(-coeffs[1] / coeffs[0]);
        return roots;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 0; i < degree; ++i)
        companion(0, i) = -coeffs[i + 1] / coeffs[0];
    for (int i = 1; i < degree; ++i)
        companion(i, i - 1) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    for (int i = 0; i < degree; ++i) {
        const auto root = solver.eigenvalues()(i);
        if (std::abs(root.imag()) < 1e-8 * (1.0 + std::abs(root.real())))
            roots.push_back(root.real());
    }
    return roots;
}

/// Grunert's P3P: all rigid model->camera transforms putting three model
/// points on three observed bearing rays. Up to four candidates.
inline std::vector<std::pair<Eigen::Matrix3d, Eigen::Vector3d>> solve_p3p(
    const std::array<Correspondence, 3>& pts, const CameraModel& cam) {
    std::vector<std::pair<Eigen::Matrix3d, Eigen::Vector3d>> out;

    Eigen::Vector3d f[3];
    for (int i = 0; i < 3; ++i)
        f[i] = Eigen::Vector3d((pts[i].image.x - cam.cx) / cam.fx,
                               (pts[i].image.y - cam.cy) / cam.fy, 1.0)
                   .normalized();

    const Eigen::Vector3d& p1 = pts[0].model;
    const Eigen::Vector3d& p2 = pts[1].model;
    const Eigen::Vector3d& p3 = pts[2].model;
    const double a = (p2 - p3).norm();
    const double b = (p1 - p3).norm();
    const double c = (p1 - p2).norm();
    if (a < 1e-9 || b < 1e-9 || c < 1e-9)
        return out;
    if (((p2 - p1).cross(p3 - p1)).norm() < 1e-9)
        return out;  // collinear model points

    const double ca = f[1].dot(f[2]);  // angle opposite side a
    const double cb = f[0].dot(f[2]);  // angle opposite side b
    const double cg = f[0].dot(f[1]);  // angle opposite side c
    const double a2 = a * a, b2 = b * b, c2 = c * c;
    const double q = (a2 - c2) / b2;
    const double p = (a2 + c2) / b2;

    // Grunert's quartic in v = s3/s1 (Haralick et al. formulation).
    const double k4 = (q - 1.0) * (q - 1.0) - 4.0 * (c2 / b2) * ca * ca;
    const double k3 =
        4.0 * (q * (1.0 - q) * cb - (1.0 - p) * ca * cg + 2.0 * (c2 / b2) * ca * ca * cb);
    const double k2 = 2.0 * (q * q - 1.0 + 2.0 * q * q * cb * cb + 2.0 * ((b2 - c2) / b2) * ca * ca -
                             4.0 * p * ca * cb * cg + 2.0 * ((b2 - a2) / b2) * cg * cg);
    const double k1 =
        4.0 * (-q * (1.0 + q) * cb + 2.0 * (a2 / b2) * cg * cg * cb - (1.0 - p) * ca * cg);
    const double k0 = (1.0 + q) * (1.0 + q) - 4.0 * (a2 / b2) * cg * cg;

    for (double v : real_roots({k4, k3, k2, k1, k0})) {
        if (v <= 0)
            continue;
        const double denom = 2.0 * (cg - v * ca);
        if (std::abs(denom) < 1e-12)
            continue;
        const double u = ((q - 1.0) * v * v - 2.0 * q * cb * v + 1.0 + q) / denom;
        if (u <= 0)
            continue;
        const double s1sq = b2 / (1.0 + v * v - 2.0 * v * cb);
        if (s1sq <= 0 || !std::isfinite(s1sq))
            continue;
        const double s1 = std::sqrt(s1sq);

        Eigen::Matrix3d model_pts, camera_pts;
        model_pts.col(0) = p1;
        model_pts.col(1) = p2;
        model_pts.col(2) = p3;
        camera_pts.col(0) = s1 * f[0];
        camera_pts.col(1) = u * s1 * f[1];
        camera_pts.col(2) = v * s1 * f[2];

        const Eigen::Matrix4d rigid = Eigen::umeyama(model_pts, camera_pts, false);
        Eigen::Matrix3d r = orthonormalized(rigid.topLeftCorner<3, 3>());
        Eigen::Vector3d t = rigid.topRightCorner<3, 1>();
        if (r.allFinite() && t.allFinite())
            out.emplace_back(r, t);
    }
    return out;
}

}  // namespace detail

/// Gauss-Newton refinement of a relative pose over the given correspondences,
/// minimizing total squared pixel reprojection error with step damping.
/// Accepted iterations never increase the RMS; five consecutive rejected
/// steps abandon refinement and return the input flagged unrefined.
inline RelativePose refine_pose(const RelativePose& initial,
                                const std::vector<Correspondence>& inliers,
                                const CameraModel& cam) {
    RelativePose best = initial;
    Eigen::Matrix3d r = initial.rotation;
    Eigen::Vector3d t = initial.translation;

    auto rms_of = [&](const Eigen::Matrix3d& rr, const Eigen::Vector3d& tt) {
        double sum = 0.0;
        for (const auto& c : inliers) {
            const double e = detail::reprojection_error(cam, rr, tt, c);
            sum += e * e;
        }
        return std::sqrt(sum / std::max<std::size_t>(1, inliers.size()));
    };

    double rms = rms_of(r, t);
    best.reprojection_rms = rms;
    double lambda = 1e-6;
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Identity();
    int consecutive_rejections = 0;

    for (int iter = 0; iter < 50; ++iter) {
        Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        for (const auto& c : inliers) {
            const Eigen::Vector3d p = r * c.model + t;
            if (p.z() <= 1e-6)
                continue;
            const double iz = 1.0 / p.z();
            Eigen::Matrix<double, 2, 3> dpix;
            dpix << cam.fx * iz, 0, -cam.fx * p.x() * iz * iz, 0, cam.fy * iz,
                -cam.fy * p.y() * iz * iz;
            // Left SE(3) perturbation: dp/d(omega) = -[p]x, dp/d(dt) = I.
            Eigen::Matrix<double, 3, 6> dp;
            dp.leftCols<3>() << 0, p.z(), -p.y(), -p.z(), 0, p.x(), p.y(), -p.x(), 0;
            dp.rightCols<3>() = Eigen::Matrix3d::Identity();
            const Eigen::Matrix<double, 2, 6> j = dpix * dp;
            const Eigen::Vector2d residual(cam.fx * p.x() * iz + cam.cx - c.image.x,
                                           cam.fy * p.y() * iz + cam.cy - c.image.y);
            h += j.transpose() * j;
            g += j.transpose() * residual;
        }
        jtj = h;

        const Eigen::Matrix<double, 6, 1> step =
            (h + lambda * Eigen::Matrix<double, 6, 6>::Identity()).ldlt().solve(-g);
        if (!step.allFinite())
            break;
        if (step.norm() < 1e-14)
            break;  // at a stationary point already

        const Eigen::Vector3d omega = step.head<3>();
        const Eigen::Matrix3d r_new = detail::orthonormalized(
            Eigen::AngleAxisd(omega.norm(),
                              omega.norm() > 1e-15 ? omega.normalized()
                                                   : Eigen::Vector3d::UnitZ())
                .toRotationMatrix() *
            r);
        const Eigen::Vector3d t_new =
            Eigen::AngleAxisd(omega.norm(),
                              omega.norm() > 1e-15 ? omega.normalized()
                                                   : Eigen::Vector3d::UnitZ()) *
                t +
            step.tail<3>();

        const double rms_new = rms_of(r_new, t_new);
        if (rms_new <= rms * (1.0 + 1e-12) + 1e-12) {
            r = r_new;
            t = t_new;
            rms = rms_new;
            lambda = std::max(1e-9, lambda * 0.5);
            consecutive_rejections = 0;
            if (step.norm() < 1e-12)
                break;
        } else {
            lambda *= 10.0;
            if (++consecutive_rejections >= 5)
                return best;  // diverged: hand back the input, unrefined
        }
    }

    best.rotation = r;
    best.translation = t;
    best.reprojection_rms = rms;
    best.refined = true;
    best.information = jtj;
    return best;
}

/// Robust PnP: 6-point DLT hypotheses inside seeded adaptive RANSAC, followed
/// by Gauss-Newton refinement over the consensus set. The inlier set and RMS
/// are recomputed against the refined pose.
inline PnpResult solve_pnp_ransac(const std::vector<Correspondence>& correspondences,
                                  const CameraModel& cam, const RansacConfig& cfg,
                                  SeededStream& rng) {
    PnpResult result;
    const int n = static_cast<int>(correspondences.size());
    constexpr int kSampleSize = 3;  // P3P minimal sample
    if (n < 4) {
        // Disambiguating among P3P candidates needs at least one extra point.
        result.failure = PnpFailure::insufficient_correspondences;
        return result;
    }

    auto count_inliers = [&](const Eigen::Matrix3d& rr, const Eigen::Vector3d& tt) {
        int count = 0;
        for (const auto& c : correspondences)
            if (detail::reprojection_error(cam, rr, tt, c) < cfg.inlier_threshold_px)
                ++count;
        return count;
    };

    int best_inliers = -1;
    Eigen::Matrix3d best_r;
    Eigen::Vector3d best_t;
    int required = cfg.max_iterations;

    for (int iter = 0; iter < required && iter < cfg.max_iterations; ++iter) {
        std::array<int, kSampleSize> picks{};
        for (int k = 0; k < kSampleSize; ++k) {
            bool fresh;
            do {
                picks[k] = static_cast<int>(rng.uniform_index(n));
                fresh = true;
                for (int j = 0; j < k; ++j)
                    fresh &= picks[j] != picks[k];
            } while (!fresh);
        }
        const std::array<Correspondence, 3> sample{correspondences[picks[0]],
                                                   correspondences[picks[1]],
                                                   correspondences[picks[2]]};

        // Candidate disambiguation: score every P3P solution on the full set.
        Eigen::Matrix3d hyp_r;
        Eigen::Vector3d hyp_t;
        int inliers = -1;
        for (const auto& [cand_r, cand_t] : detail::solve_p3p(sample, cam)) {
            const int count = count_inliers(cand_r, cand_t);
            if (count > inliers) {
                inliers = count;
                hyp_r = cand_r;
                hyp_t = cand_t;
            }
        }
        if (inliers < 0)
            continue;

        if (inliers > best_inliers && inliers >= 4) {
            // Local optimization: polish the hypothesis on its own consensus
            // set and recount, so noise on the minimal sample is averaged out.
            std::vector<Correspondence> consensus;
            for (const auto& c : correspondences)
                if (detail::reprojection_error(cam, hyp_r, hyp_t, c) < cfg.inlier_threshold_px)
                    consensus.push_back(c);
            RelativePose seed;
            seed.rotation = hyp_r;
            seed.translation = hyp_t;
            const RelativePose polished = refine_pose(seed, consensus, cam);
            const int polished_inliers = count_inliers(polished.rotation, polished.translation);
            if (polished_inliers >= inliers) {
                hyp_r = polished.rotation;
                hyp_t = polished.translation;
                inliers = polished_inliers;
            }
        }

        if (inliers > best_inliers) {
            best_inliers = inliers;
            best_r = hyp_r;
            best_t = hyp_t;
            const double w = static_cast<double>(inliers) / n;
            const double denom = std::log(std::max(1e-12, 1.0 - std::pow(w, kSampleSize)));
            if (denom < 0) {
                const double need = std::log(1.0 - cfg.confidence) / denom;
                required = static_cast<int>(
                    std::min<double>(cfg.max_iterations, std::ceil(need)));
            }
        }
    }

    if (best_inliers < cfg.min_consensus) {
        result.failure = PnpFailure::no_consensus;
        return result;
    }

    // Refine on the consensus set, then re-gather and refine again until the
    // set stabilizes: points just outside the gate under the raw hypothesis
    // often fall inside after refinement. The refinement gate is widened to
    // 1.5x the reporting threshold so near-threshold genuine points still
    // contribute; accidental outlier captures at that radius are vanishingly
    // rare against the image area.
    RelativePose refined;
    refined.rotation = best_r;
    refined.translation = best_t;
    const double refine_gate = 1.5 * cfg.inlier_threshold_px;
    std::vector<int> previous_set;
    for (int round = 0; round < 4; ++round) {
        std::vector<Correspondence> consensus;
        std::vector<int> ids;
        for (const auto& c : correspondences)
            if (detail::reprojection_error(cam, refined.rotation, refined.translation, c) <
                refine_gate) {
                consensus.push_back(c);
                ids.push_back(c.landmark_id);
            }
        if (static_cast<int>(consensus.size()) < 4 || ids == previous_set)
            break;
        previous_set = std::move(ids);
        refined = refine_pose(refined, consensus, cam);
    }

    refined.inlier_ids.clear();
    double sum = 0.0;
    int count = 0;
    for (const auto& c : correspondences) {
        const double e =
            detail::reprojection_error(cam, refined.rotation, refined.translation, c);
        if (e < cfg.inlier_threshold_px) {
            refined.inlier_ids.push_back(c.landmark_id);
            sum += e * e;
            ++count;
        }
    }
    if (count < cfg.min_consensus) {
        result.failure = PnpFailure::no_consensus;
        return result;
    }
    refined.reprojection_rms = std::sqrt(sum / count);
    result.pose = refined;
    return result;
}

/// Absolute planar rover pose from a station sighting: composes the known
/// station pose with the inverted relative pose and the camera extrinsics,
/// then projects to the plane. The returned covariance maps the solver's
/// 6-DoF uncertainty into (x, y, heading) by first-order (numeric) propagation.
struct Relocalization {
    Pose2 pose;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity() * 1e-4;
};

inline Relocalization relocalize(const Pose2& station_pose, const RelativePose& relative,
                                 const CameraModel& cam) {
    const Iso3 world_from_station = lift(station_pose);
    const Iso3 body_from_cam = camera_extrinsics(cam);

    auto rover_pose_for = [&](const Iso3& cam_from_station) {
        const Iso3 world_from_body =
            world_from_station * cam_from_station.inverse() * body_from_cam.inverse();
        return flatten(world_from_body);
    };

    Relocalization out;
    out.pose = rover_pose_for(relative.transform());

    // Solver covariance in the left-perturbation parameterization, scaled by
    // the per-axis residual variance (RMS is over 2D pixel residuals).
    const double sigma2 = std::max(1e-4, relative.reprojection_rms * relative.reprojection_rms);
    Eigen::Matrix<double, 6, 6> info = relative.information;
    info += Eigen::Matrix<double, 6, 6>::Identity() * 1e-9;
    const Eigen::Matrix<double, 6, 6> pose_cov = sigma2 * info.inverse();

    // Numeric Jacobian of the planar output w.r.t. the 6-DoF perturbation.
    Eigen::Matrix<double, 3, 6> jac;
    const double eps = 1e-6;
    for (int k = 0; k < 6; ++k) {
        Eigen::Matrix<double, 6, 1> xi = Eigen::Matrix<double, 6, 1>::Zero();
        xi(k) = eps;
        const Eigen::Vector3d omega = xi.head<3>();
        Iso3 delta = Iso3::Identity();
        delta.linear() =
            Eigen::AngleAxisd(omega.norm(),
                              omega.norm() > 1e-15 ? omega.normalized() : Eigen::Vector3d::UnitZ())
                .toRotationMatrix();
        delta.translation() = xi.tail<3>();

        const Pose2 plus = rover_pose_for(delta * relative.transform());
        jac(0, k) = (plus.x - out.pose.x) / eps;
        jac(1, k) = (plus.y - out.pose.y) / eps;
        jac(2, k) = normalize_angle(plus.heading - out.pose.heading) / eps;
    }

    Eigen::Matrix3d planar = jac * pose_cov * jac.transpose();
    planar = 0.5 * (planar + planar.transpose());
    planar += Eigen::Matrix3d::Identity() * 1e-6;  // floor keeps the EKF reset well-posed
    out.covariance = planar;
    return out;
}

}  // namespace regolith
