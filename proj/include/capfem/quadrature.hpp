#pragma once

/// @file quadrature.hpp
/// @brief Fixed quadrature rules on the reference triangle and unit segment.
///
/// Triangle rules are stored in barycentric coordinates with weights summing
/// to the reference-triangle measure 1/2; integrals over a physical element
/// use sum_i w_i f(x_i) * |J| with |J| = 2 * area. Segment rules live on
/// [0, 1] with weights summing to 1.

#include <vector>

#include "capfem/error.hpp"
#include "capfem/geometry.hpp"

namespace capfem {

struct TrianglePoint {
    double b0, b1, b2; // barycentric coordinates
    double w;          // weight, reference measure normalization
};

struct TriangleRule {
    int degree = 0; // exact for bivariate polynomials up to this degree
    std::vector<TrianglePoint> points;
};

struct SegmentPoint {
    double s; // coordinate in [0, 1]
    double w;
};

struct SegmentRule {
    int degree = 0;
    std::vector<SegmentPoint> points;
};

namespace detail {

inline TriangleRule make_triangle_rule(int degree) {
    TriangleRule rule;
    rule.degree = degree;
    auto push3 = [&rule](double a, double b, double w) {
        // three cyclic placements of the (a, b, b) orbit; w is the
        // area-normalized weight, halved to the reference measure
        rule.points.push_back({a, b, b, 0.5 * w});
        rule.points.push_back({b, a, b, 0.5 * w});
        rule.points.push_back({b, b, a, 0.5 * w});
    };
    auto push6 = [&rule](double a, double b, double c, double w) {
        rule.points.push_back({a, b, c, 0.5 * w});
        rule.points.push_back({a, c, b, 0.5 * w});
        rule.points.push_back({b, a, c, 0.5 * w});
        rule.points.push_back({b, c, a, 0.5 * w});
        rule.points.push_back({c, a, b, 0.5 * w});
        rule.points.push_back({c, b, a, 0.5 * w});
    };
    switch (degree) {
    case 1:
        rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5});
        break;
    case 2:
        push3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
        break;
    case 4:
        push3(0.108103018168070, 0.445948490915965, 0.223381589678011);
        push3(0.816847572980459, 0.091576213509771, 0.109951743655322);
        break;
    case 6:
        push3(0.501426509658179, 0.249286745170910, 0.116786275726379);
        push3(0.873821971016996, 0.063089014491502, 0.050844906370207);
        push6(0.053145049844816, 0.310352451033785, 0.636502499121399,
              0.082851075618374);
        break;
    default:
        throw Error(ErrorKind::invalid_argument,
                    "quadrature: no triangle rule of degree " +
                        std::to_string(degree));
    }
    return rule;
}

inline SegmentRule make_segment_rule(int npoints) {
    SegmentRule rule;
    auto push_pair = [&rule](double xi, double w) {
        // Gauss-Legendre node +-xi on [-1,1] mapped to [0,1]
        rule.points.push_back({0.5 * (1.0 - xi), 0.5 * w});
        rule.points.push_back({0.5 * (1.0 + xi), 0.5 * w});
    };
    switch (npoints) {
    case 1:
        rule.degree = 1;
        rule.points.push_back({0.5, 1.0});
        break;
    case 2:
        rule.degree = 3;
        push_pair(0.5773502691896257645091488, 1.0);
        break;
    case 3:
        rule.degree = 5;
        rule.points.push_back({0.5, 4.0 / 9.0});
        push_pair(0.7745966692414833770358531, 5.0 / 9.0);
        break;
    case 4:
        rule.degree = 7;
        push_pair(0.3399810435848562648026658, 0.6521451548625461426269361);
        push_pair(0.8611363115940525752239465, 0.3478548451374538573730639);
        break;
    default:
        throw Error(ErrorKind::invalid_argument,
                    "quadrature: no segment rule with " +
                        std::to_string(npoints) + " points");
    }
    return rule;
}

} // namespace detail

/// Returns the rule exact for the requested polynomial degree (1, 2, 4, 6;
/// intermediate degrees round up).
inline const TriangleRule& triangle_rule(int degree) {
    static const TriangleRule r1 = detail::make_triangle_rule(1);
    static const TriangleRule r2 = detail::make_triangle_rule(2);
    static const TriangleRule r4 = detail::make_triangle_rule(4);
    static const TriangleRule r6 = detail::make_triangle_rule(6);
    if (degree <= 1) return r1;
    if (degree <= 2) return r2;
    if (degree <= 4) return r4;
    if (degree <= 6) return r6;
    throw Error(ErrorKind::invalid_argument,
                "quadrature: no triangle rule of degree " +
                    std::to_string(degree));
}

inline const SegmentRule& segment_rule(int npoints) {
    static const SegmentRule r1 = detail::make_segment_rule(1);
    static const SegmentRule r2 = detail::make_segment_rule(2);
    static const SegmentRule r3 = detail::make_segment_rule(3);
    static const SegmentRule r4 = detail::make_segment_rule(4);
    switch (npoints) {
    case 1: return r1;
    case 2: return r2;
    case 3: return r3;
    case 4: return r4;
    default:
        throw Error(ErrorKind::invalid_argument,
                    "quadrature: no segment rule with " +
                        std::to_string(npoints) + " points");
    }
}

/// Maps a barycentric quadrature point into the triangle (p0, p1, p2).
inline Vec2 map_point(const TrianglePoint& q, Vec2 p0, Vec2 p1, Vec2 p2) {
    return {q.b0 * p0.x + q.b1 * p1.x + q.b2 * p2.x,
            q.b0 * p0.y + q.b1 * p1.y + q.b2 * p2.y};
}

} // namespace capfem
