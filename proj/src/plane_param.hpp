#pragma once

#include "qrect/planes.hpp"

namespace qrect::detail {

// Local chart around a plane: z = [base offset; tangent coefficients].
class PlaneChart {
public:
    PlaneChart(const Plane& origin, bool with_base) : origin_(origin), with_base_(with_base) {
        const Mat& B = frame();
        Eigen::HouseholderQR<Mat> qr(B);
        const Mat Q = qr.householderQ() * Mat::Identity(B.rows(), B.rows());
        complement_ = Q.rightCols(B.rows() - B.cols());
        base_dim_ = with_base ? (heisenberg() ? static_cast<Index>(B.rows()) + 1 : static_cast<Index>(B.rows())) : 0;
    }

    bool heisenberg() const { return std::holds_alternative<HorizontalPlane>(origin_); }
    const Mat& frame() const {
        return heisenberg() ? std::get<HorizontalPlane>(origin_).basis : std::get<AffinePlane>(origin_).basis;
    }
    Index size() const { return base_dim_ + complement_.cols() * frame().cols(); }

    // Frame at tangent coefficients; falls back to the origin frame on rank loss.
    Mat frame_at(const double* c) const {
        const Mat& B = frame();
        const Eigen::Map<const Mat> C(c, complement_.cols(), B.cols());
        const Mat raw = B + complement_ * C;
        if (heisenberg()) {
            Mat f = isotropize(raw);
            return f.cols() == B.cols() ? f : B;
        }
        Eigen::HouseholderQR<Mat> qr(raw);
        return qr.householderQ() * Mat::Identity(raw.rows(), raw.cols());
    }

    Plane at(const Vec& z) const {
        const Mat f = frame_at(z.data() + base_dim_);
        if (heisenberg()) {
            HorizontalPlane h = std::get<HorizontalPlane>(origin_);
            if (with_base_) {
                const Index d = h.base.x.size();
                h.base.x += z.head(d);
                h.base.t += z(d);
            }
            h.basis = f;
            return h;
        }
        AffinePlane a = std::get<AffinePlane>(origin_);
        if (with_base_) a.base += z.head(base_dim_);
        a.basis = f;
        return a;
    }

private:
    Plane origin_;
    bool with_base_;
    Mat complement_;
    Index base_dim_ = 0;
};

inline const Mat& plane_frame(const Plane& V) {
    return std::holds_alternative<HorizontalPlane>(V) ? std::get<HorizontalPlane>(V).basis
                                                       : std::get<AffinePlane>(V).basis;
}

}  // namespace qrect::detail
