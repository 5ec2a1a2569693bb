#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "mttsort/errors.hpp"

namespace mttsort {

/// Appearance embedding. Unit L2 norm once ingested.
using Embedding = Eigen::VectorXd;

/// Box in center form: (cx, cy, aspect = width / height, height).
using CenterBox = Eigen::Vector4d;

/// Axis-aligned pixel-space box, top-left anchored. Width and height are
/// strictly positive.
class BoundingBox {
public:
    BoundingBox() = default;

    BoundingBox(double left, double top, double width, double height)
        : left_(left), top_(top), width_(width), height_(height) {
        if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(left) || !std::isfinite(top) ||
            !std::isfinite(width) || !std::isfinite(height)) {
            throw Error("bounding box requires finite coordinates and positive width/height");
        }
    }

    static BoundingBox from_center(const CenterBox& c) {
        const double w = c[2] * c[3];
        return {c[0] - w / 2.0, c[1] - c[3] / 2.0, w, c[3]};
    }

    double left() const { return left_; }
    double top() const { return top_; }
    double width() const { return width_; }
    double height() const { return height_; }
    double right() const { return left_ + width_; }
    double bottom() const { return top_ + height_; }
    double area() const { return width_ * height_; }

    CenterBox to_center() const {
        return {left_ + width_ / 2.0, top_ + height_ / 2.0, width_ / height_, height_};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

private:
    double left_ = 0.0;
    double top_ = 0.0;
    double width_ = 1.0;
    double height_ = 1.0;
};

inline CenterBox to_center_form(const BoundingBox& box) { return box.to_center(); }
inline BoundingBox from_center_form(const CenterBox& c) { return BoundingBox::from_center(c); }

struct Detection {
    int frame = 0;
    BoundingBox box;
    double confidence = 0.0;
    Embedding embedding;
};

/// Returns `v / |v|`. Throws if `v` has zero norm.
inline Embedding normalized(const Embedding& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw SchemaError("embedding has zero or non-finite norm");
    return v / n;
}

enum class TrackState { Tentative, Confirmed, Deleted };

inline const char* to_string(TrackState s) {
    switch (s) {
        case TrackState::Tentative: return "tentative";
        case TrackState::Confirmed: return "confirmed";
        case TrackState::Deleted: return "deleted";
    }
    return "?";
}

}  // namespace mttsort
