#include "cncost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cncost/errors.hpp"
#include "cncost/rng.hpp"

namespace cncost {

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::through_hole: return "through_hole";
        case FeatureKind::blind_hole: return "blind_hole";
        case FeatureKind::rect_pocket: return "rect_pocket";
        case FeatureKind::through_slot: return "through_slot";
        case FeatureKind::step: return "step";
        case FeatureKind::circ_end_pocket: return "circ_end_pocket";
    }
    throw MalformedToken("bad feature kind value");
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "through_hole") return FeatureKind::through_hole;
    if (s == "blind_hole") return FeatureKind::blind_hole;
    if (s == "rect_pocket") return FeatureKind::rect_pocket;
    if (s == "through_slot") return FeatureKind::through_slot;
    if (s == "step") return FeatureKind::step;
    if (s == "circ_end_pocket") return FeatureKind::circ_end_pocket;
    throw MalformedToken("unknown feature kind: " + s);
}

double synth_material_rate(const std::string& material) {
    if (material == "steel") return 1.0;
    if (material == "aluminum") return 0.8;
    if (material == "stainless") return 1.4;
    throw UnknownMaterial("no machining rate for material: " + material);
}

namespace {

bool kind_has_radius(FeatureKind k) {
    return k == FeatureKind::through_hole || k == FeatureKind::blind_hole ||
           k == FeatureKind::circ_end_pocket;
}

} // namespace

double synth_feature_cost(const SynthFeature& feature) {
    double c = 50.0 + 6.0 * feature.depth;
    if (kind_has_radius(feature.kind)) c += 90.0 / std::max(feature.radius, 1.0);
    return c;
}

double synth_oracle_cost(const std::string& material, double volume,
                         const std::vector<SynthFeature>& features) {
    double c = synth_material_rate(material) * volume * 1e-3;
    for (const SynthFeature& f : features) c += synth_feature_cost(f);
    return c;
}

// ---------------------------------------------------------------------------
// Constructive face-set meshing. Every part is an axis-aligned block with
// features cut into the top face, one feature per x-wise column, so each
// boundary face is a planar axis-aligned polygon we can enumerate directly.
// ---------------------------------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

struct P2 {
    double x, y;
};

double poly_area(const std::vector<P2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const P2& a = p[i];
        const P2& b = p[(i + 1) % p.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return s / 2.0; // positive for CCW loops
}

P2 poly_centroid(const std::vector<P2>& p) {
    P2 c{0.0, 0.0};
    for (const P2& v : p) {
        c.x += v.x;
        c.y += v.y;
    }
    c.x /= static_cast<double>(p.size());
    c.y /= static_cast<double>(p.size());
    return c;
}

std::vector<P2> make_rect_loop(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; // CCW
}

std::vector<P2> make_ngon(double cx, double cy, double r, int n = 16) {
    std::vector<P2> loop;
    loop.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        loop.push_back(P2{cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    return loop;
}

// Rectangle of straight half-length `half` with semicircular caps of radius
// r at both x ends, approximated with `seg` segments per cap. Convex, CCW.
std::vector<P2> make_stadium(double cx, double cy, double half, double r, int seg = 8) {
    std::vector<P2> loop;
    loop.reserve(2 * static_cast<std::size_t>(seg) + 2);
    for (int k = 0; k <= seg; ++k) {
        const double a = -kPi / 2 + kPi * k / seg;
        loop.push_back(P2{cx + half + r * std::cos(a), cy + r * std::sin(a)});
    }
    for (int k = 0; k <= seg; ++k) {
        const double a = kPi / 2 + kPi * k / seg;
        loop.push_back(P2{cx - half + r * std::cos(a), cy + r * std::sin(a)});
    }
    return loop;
}

void add_tri(TriangleMesh& m, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& want) {
    Triangle t{a, b, c};
    if (t.normal().dot(want) < 0.0) std::swap(t.v1, t.v2);
    m.triangles.push_back(t);
}

// a-b-c-d in loop order.
void add_quad(TriangleMesh& m, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
              const Vec3& want) {
    add_tri(m, a, b, c, want);
    add_tri(m, a, c, d, want);
}

void add_rect_z(TriangleMesh& m, double x0, double y0, double x1, double y1, double z,
                double nz) {
    add_quad(m, Vec3{x0, y0, z}, Vec3{x1, y0, z}, Vec3{x1, y1, z}, Vec3{x0, y1, z},
             Vec3{0, 0, nz});
}

void add_rect_y(TriangleMesh& m, double x0, double z0, double x1, double z1, double y,
                double ny) {
    add_quad(m, Vec3{x0, y, z0}, Vec3{x1, y, z0}, Vec3{x1, y, z1}, Vec3{x0, y, z1},
             Vec3{0, ny, 0});
}

void add_rect_x(TriangleMesh& m, double y0, double z0, double y1, double z1, double x,
                double nx) {
    add_quad(m, Vec3{x, y0, z0}, Vec3{x, y1, z0}, Vec3{x, y1, z1}, Vec3{x, y0, z1},
             Vec3{nx, 0, 0});
}

// Triangulates the planar region between an axis-aligned rectangular outer
// loop and a convex inner loop strictly inside it. The region is sliced into
// horizontal bands at every inner-vertex y; a band is either a full-width
// strip (above or below the cavity) or a left and a right trapezoid beside
// it. Every trapezoid is emitted with explicit CCW-for-+z orientation, so
// the enclosed-volume integral stays exact; band boundaries may form
// T-junctions against neighboring faces, which leave the surface
// geometrically watertight.
void add_annulus_z(TriangleMesh& m, const std::vector<P2>& outer, const std::vector<P2>& inner,
                   double z, double nz) {
    double rx0 = outer[0].x, rx1 = outer[0].x, ry0 = outer[0].y, ry1 = outer[0].y;
    for (const P2& p : outer) {
        rx0 = std::min(rx0, p.x);
        rx1 = std::max(rx1, p.x);
        ry0 = std::min(ry0, p.y);
        ry1 = std::max(ry1, p.y);
    }

    std::vector<double> ys{ry0, ry1};
    for (const P2& p : inner) ys.push_back(p.y);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    // Trapezoid with bottom edge [ax0,ax1] at ya and top edge [bx0,bx1] at yb.
    auto trapezoid = [&](double ax0, double ax1, double ya, double bx0, double bx1,
                         double yb) {
        if (ax1 <= ax0 && bx1 <= bx0) return;
        add_quad(m, Vec3{ax0, ya, z}, Vec3{ax1, ya, z}, Vec3{bx1, yb, z}, Vec3{bx0, yb, z},
                 Vec3{0, 0, nz});
    };

    struct Crossing {
        double xa, xm, xb;
    };
    const std::size_t ni = inner.size();
    for (std::size_t band = 0; band + 1 < ys.size(); ++band) {
        const double ya = ys[band], yb = ys[band + 1];
        if (!(yb > ya)) continue;
        const double ym = 0.5 * (ya + yb);

        // Inner edges crossing the band midline. Bands are cut at every inner
        // vertex y, so a crossing edge spans the whole band; for a convex
        // loop there are two such edges (left and right chain).
        std::vector<Crossing> cross;
        for (std::size_t i = 0; i < ni; ++i) {
            const P2& p = inner[i];
            const P2& q = inner[(i + 1) % ni];
            if ((p.y <= ym) == (q.y <= ym)) continue;
            auto x_at = [&](double y) {
                const double f = std::clamp((y - p.y) / (q.y - p.y), 0.0, 1.0);
                return p.x + f * (q.x - p.x);
            };
            cross.push_back(Crossing{x_at(ya), x_at(ym), x_at(yb)});
        }

        if (cross.empty()) {
            trapezoid(rx0, rx1, ya, rx0, rx1, yb); // full strip
            continue;
        }
        std::sort(cross.begin(), cross.end(),
                  [](const Crossing& a, const Crossing& b) { return a.xm < b.xm; });
        const Crossing& left = cross.front();
        const Crossing& right = cross.back();
        trapezoid(rx0, left.xa, ya, rx0, left.xb, yb);
        trapezoid(right.xa, rx1, ya, right.xb, rx1, yb);
    }
}

// Fan triangulation of a convex loop at height z.
void add_fan_z(TriangleMesh& m, const std::vector<P2>& loop, double z, double nz) {
    const Vec3 want{0, 0, nz};
    for (std::size_t i = 1; i + 1 < loop.size(); ++i)
        add_tri(m, Vec3{loop[0].x, loop[0].y, z}, Vec3{loop[i].x, loop[i].y, z},
                Vec3{loop[i + 1].x, loop[i + 1].y, z}, want);
}

// Vertical walls along a loop. inward=true points the normals at the loop
// centroid (cavity walls); false points them away (outer skin).
void add_loop_walls(TriangleMesh& m, const std::vector<P2>& loop, double z_lo, double z_hi,
                    bool inward) {
    const P2 c = poly_centroid(loop);
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const P2& p = loop[i];
        const P2& q = loop[(i + 1) % loop.size()];
        const P2 mid{(p.x + q.x) / 2, (p.y + q.y) / 2};
        Vec3 want{c.x - mid.x, c.y - mid.y, 0.0};
        if (!inward) want = want * -1.0;
        add_quad(m, Vec3{p.x, p.y, z_lo}, Vec3{q.x, q.y, z_lo}, Vec3{q.x, q.y, z_hi},
                 Vec3{p.x, p.y, z_hi}, want);
    }
}

Aabb loop_bbox(const std::vector<P2>& loop, double z_lo, double z_hi) {
    Aabb box{Vec3{loop[0].x, loop[0].y, z_lo}, Vec3{loop[0].x, loop[0].y, z_hi}};
    for (const P2& p : loop) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
    }
    return box;
}

// One column of the x-wise tiling and the cut realized inside it.
struct ColumnCut {
    FeatureKind kind = FeatureKind::rect_pocket;
    bool has_cut = false;
    std::vector<P2> footprint; // hole / pocket / stadium kinds, CCW
    double z_lo = 0.0;         // bottom of the cut (0 for through kinds)
    double sx0 = 0.0, sx1 = 0.0; // slot / step x-range
    double depth = 0.0;
    double radius = 0.0;
};

bool is_footprint_kind(FeatureKind k) {
    return k == FeatureKind::through_hole || k == FeatureKind::blind_hole ||
           k == FeatureKind::rect_pocket || k == FeatureKind::circ_end_pocket;
}

SynthPart build_block(double w, double h, double t, const std::string& material,
                      const std::vector<ColumnCut>& cuts) {
    SynthPart part;
    part.material = material;
    TriangleMesh& m = part.mesh;

    const std::size_t ncol = std::max<std::size_t>(cuts.size(), 1);
    auto col_x = [&](std::size_t c) { return w * static_cast<double>(c) / ncol; };

    double removed = 0.0;

    for (std::size_t c = 0; c < ncol; ++c) {
        const double x0 = col_x(c);
        const double x1 = col_x(c + 1);
        const ColumnCut* cut = (c < cuts.size() && cuts[c].has_cut) ? &cuts[c] : nullptr;
        const std::vector<P2> col_rect = make_rect_loop(x0, 0.0, x1, h);

        if (cut == nullptr) {
            add_rect_z(m, x0, 0.0, x1, h, t, +1.0); // top
            add_rect_z(m, x0, 0.0, x1, h, 0.0, -1.0); // bottom
            add_rect_y(m, x0, 0.0, x1, t, 0.0, -1.0); // y = 0 skin
            add_rect_y(m, x0, 0.0, x1, t, h, +1.0);   // y = h skin
            continue;
        }

        SynthFeature feat;
        feat.kind = cut->kind;
        feat.depth = cut->depth;
        feat.radius = cut->radius;

        if (is_footprint_kind(cut->kind)) {
            const std::vector<P2>& fp = cut->footprint;
            add_annulus_z(m, col_rect, fp, t, +1.0); // top ring
            add_loop_walls(m, fp, cut->z_lo, t, /*inward=*/true);
            if (cut->kind == FeatureKind::through_hole) {
                add_annulus_z(m, col_rect, fp, 0.0, -1.0); // bottom ring
            } else {
                add_rect_z(m, x0, 0.0, x1, h, 0.0, -1.0);
                add_fan_z(m, fp, cut->z_lo, +1.0); // cavity floor
            }
            add_rect_y(m, x0, 0.0, x1, t, 0.0, -1.0);
            add_rect_y(m, x0, 0.0, x1, t, h, +1.0);

            const double area = poly_area(fp);
            feat.removed_volume = area * (t - cut->z_lo);
            const Aabb bb = loop_bbox(fp, cut->z_lo, t);
            feat.box = FeatureBox{to_string(cut->kind), bb.min, bb.max};
        } else if (cut->kind == FeatureKind::through_slot) {
            const double s0 = cut->sx0, s1 = cut->sx1, zf = t - cut->depth;
            add_rect_z(m, x0, 0.0, s0, h, t, +1.0); // top strip, left of slot
            add_rect_z(m, s1, 0.0, x1, h, t, +1.0); // top strip, right
            add_rect_z(m, s0, 0.0, s1, h, zf, +1.0); // slot floor
            add_rect_x(m, 0.0, zf, h, t, s0, +1.0);  // slot wall (void at x > s0)
            add_rect_x(m, 0.0, zf, h, t, s1, -1.0);  // slot wall (void at x < s1)
            add_rect_z(m, x0, 0.0, x1, h, 0.0, -1.0);
            // Side skins get a notch; split at zf so slot-wall edges match.
            for (double y : {0.0, h}) {
                const double ny = (y == 0.0) ? -1.0 : +1.0;
                add_rect_y(m, x0, 0.0, s0, zf, y, ny);
                add_rect_y(m, x0, zf, s0, t, y, ny);
                add_rect_y(m, s0, 0.0, s1, zf, y, ny);
                add_rect_y(m, s1, 0.0, x1, zf, y, ny);
                add_rect_y(m, s1, zf, x1, t, y, ny);
            }
            feat.removed_volume = (s1 - s0) * h * cut->depth;
            feat.box = FeatureBox{to_string(cut->kind), Vec3{s0, 0.0, zf}, Vec3{s1, h, t}};
        } else { // step at the x = w end
            const double xs = cut->sx0, zf = t - cut->depth;
            add_rect_z(m, x0, 0.0, xs, h, t, +1.0);  // remaining top
            add_rect_z(m, xs, 0.0, w, h, zf, +1.0);  // step floor
            add_rect_x(m, 0.0, zf, h, t, xs, +1.0);  // riser (void at x > xs)
            add_rect_z(m, x0, 0.0, x1, h, 0.0, -1.0);
            for (double y : {0.0, h}) { // L-profile side skins
                const double ny = (y == 0.0) ? -1.0 : +1.0;
                add_rect_y(m, x0, 0.0, xs, t, y, ny);
                add_rect_y(m, xs, 0.0, x1, zf, y, ny);
            }
            feat.removed_volume = (w - xs) * h * cut->depth;
            feat.box = FeatureBox{to_string(cut->kind), Vec3{xs, 0.0, zf}, Vec3{w, h, t}};
        }

        removed += feat.removed_volume;
        part.features.push_back(std::move(feat));
    }

    add_rect_x(m, 0.0, 0.0, h, t, 0.0, -1.0); // x = 0 skin
    const bool step_at_end = !cuts.empty() && cuts.back().has_cut &&
                             cuts.back().kind == FeatureKind::step;
    if (step_at_end)
        add_rect_x(m, 0.0, 0.0, h, t - cuts.back().depth, w, +1.0); // shortened x = w skin
    else
        add_rect_x(m, 0.0, 0.0, h, t, w, +1.0);

    part.volume = w * h * t - removed;
    return part;
}

} // namespace

SynthPart synth_build_part(const SynthSpec& spec, std::uint64_t seed, std::size_t index) {
    if (spec.part_count == 0) throw InfeasibleSpec("part_count must be positive");
    if (!(spec.block_xy_min > 0.0 && spec.block_xy_max >= spec.block_xy_min))
        throw InfeasibleSpec("bad block dimension range");
    if (!(spec.thickness_min > 0.0 && spec.thickness_max >= spec.thickness_min))
        throw InfeasibleSpec("bad thickness range");
    if (spec.features_max < spec.features_min)
        throw InfeasibleSpec("features_max < features_min");
    if (spec.features_max > 0) {
        if (!(spec.depth_min > 0.0 && spec.depth_max >= spec.depth_min))
            throw InfeasibleSpec("bad depth range");
        if (spec.depth_max >= spec.thickness_min)
            throw InfeasibleSpec("depth_max must stay below thickness_min");
        if (!(spec.radius_min > 0.0 && spec.radius_max >= spec.radius_min))
            throw InfeasibleSpec("bad radius range");
        if (spec.kinds.empty()) throw InfeasibleSpec("no feature kinds to draw from");
    }
    if (spec.materials.empty()) throw InfeasibleSpec("no materials to draw from");

    SplitMix64 rng = derive_rng(seed, "part", static_cast<std::uint64_t>(index));

    auto dim = [&]() {
        double u = rng.uniform();
        if (spec.size_skew != 1.0) u = std::pow(u, spec.size_skew);
        return spec.block_xy_min + u * (spec.block_xy_max - spec.block_xy_min);
    };
    const double w = dim();
    const double h = dim();
    const double t = rng.uniform(spec.thickness_min, spec.thickness_max);
    const std::string material =
        spec.materials[static_cast<std::size_t>(rng.below(spec.materials.size()))];

    const std::size_t nfeat =
        spec.features_min +
        static_cast<std::size_t>(rng.below(spec.features_max - spec.features_min + 1));

    std::vector<ColumnCut> cuts(nfeat);
    for (std::size_t c = 0; c < nfeat; ++c) {
        FeatureKind kind = spec.kinds[static_cast<std::size_t>(rng.below(spec.kinds.size()))];
        // A step only makes sense on the block's x-end edge.
        if (kind == FeatureKind::step && c + 1 != nfeat) kind = FeatureKind::rect_pocket;

        const double cw = w / static_cast<double>(nfeat);
        const double x0 = w * static_cast<double>(c) / static_cast<double>(nfeat);
        const double x1 = w * static_cast<double>(c + 1) / static_cast<double>(nfeat);
        const double mx = 0.15 * cw;
        const double my = 0.1 * h;
        const double aw = cw - 2 * mx; // usable footprint width
        const double ah = h - 2 * my;

        ColumnCut& cut = cuts[c];
        cut.kind = kind;
        cut.has_cut = true;
        cut.depth = rng.uniform(spec.depth_min, spec.depth_max);

        switch (kind) {
            case FeatureKind::through_hole:
            case FeatureKind::blind_hole: {
                const double rmax = std::min(spec.radius_max, 0.5 * std::min(aw, ah));
                if (rmax < spec.radius_min)
                    throw InfeasibleSpec("hole radius cannot fit in its column");
                cut.radius = rng.uniform(spec.radius_min, rmax);
                const double cx = rng.uniform(x0 + mx + cut.radius, x1 - mx - cut.radius);
                const double cy = rng.uniform(my + cut.radius, h - my - cut.radius);
                cut.footprint = make_ngon(cx, cy, cut.radius);
                if (kind == FeatureKind::through_hole) {
                    cut.z_lo = 0.0;
                    cut.depth = t;
                } else {
                    cut.z_lo = t - cut.depth;
                }
                break;
            }
            case FeatureKind::rect_pocket: {
                // Footprint capped at 45 mm a side, keeping the depth term
                // dominant over the material saved by a deeper cut.
                const double wmax = std::min(aw, 45.0);
                const double hmax = std::min(ah, 45.0);
                if (wmax < 8.0 || hmax < 8.0)
                    throw InfeasibleSpec("pocket cannot fit in its column");
                const double pw = rng.uniform(8.0, wmax);
                const double ph = rng.uniform(8.0, hmax);
                const double px = rng.uniform(x0 + mx, x1 - mx - pw);
                const double py = rng.uniform(my, h - my - ph);
                cut.footprint = make_rect_loop(px, py, px + pw, py + ph);
                cut.z_lo = t - cut.depth;
                break;
            }
            case FeatureKind::circ_end_pocket: {
                const double rmax = std::min({spec.radius_max, ah / 2.0, aw / 4.0});
                if (rmax < spec.radius_min)
                    throw InfeasibleSpec("end pocket cannot fit in its column");
                cut.radius = rng.uniform(spec.radius_min, rmax);
                const double half_max = std::min(45.0, aw - 2 * cut.radius) / 2.0;
                const double half = rng.uniform(cut.radius / 2.0, half_max);
                const double cx =
                    rng.uniform(x0 + mx + half + cut.radius, x1 - mx - half - cut.radius);
                const double cy = rng.uniform(my + cut.radius, h - my - cut.radius);
                cut.footprint = make_stadium(cx, cy, half, cut.radius);
                cut.z_lo = t - cut.depth;
                break;
            }
            case FeatureKind::through_slot: {
                const double wmax = std::min(30.0, aw);
                if (wmax < 6.0) throw InfeasibleSpec("slot cannot fit in its column");
                const double sw = rng.uniform(6.0, wmax);
                cut.sx0 = rng.uniform(x0 + mx, x1 - mx - sw);
                cut.sx1 = cut.sx0 + sw;
                cut.z_lo = t - cut.depth;
                break;
            }
            case FeatureKind::step: {
                const double wmax = std::min(30.0, aw);
                if (wmax < 6.0) throw InfeasibleSpec("step cannot fit in its column");
                const double sw = rng.uniform(6.0, wmax);
                cut.sx0 = w - sw;
                cut.sx1 = w;
                cut.z_lo = t - cut.depth;
                break;
            }
        }
    }

    return build_block(w, h, t, material, cuts);
}

namespace {

std::string part_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "part_%04zu", index);
    return buf;
}

PartRecord record_for(const SynthPart& part, const std::string& id,
                      const std::filesystem::path& mesh_path) {
    PartRecord rec;
    rec.id = id;
    rec.mesh_path = mesh_path;
    rec.material = part.material;
    rec.volume = part.volume;
    rec.has_volume = true;
    rec.cost = synth_oracle_cost(part.material, part.volume, part.features);
    for (const SynthFeature& f : part.features) rec.features.push_back(f.box);
    return rec;
}

} // namespace

std::vector<PartRecord> synth_generate(const SynthSpec& spec, std::uint64_t seed,
                                       const std::filesystem::path& out_dir) {
    const std::filesystem::path mesh_dir = out_dir / "meshes";
    std::filesystem::create_directories(mesh_dir);

    std::vector<PartRecord> records;
    records.reserve(spec.part_count);
    for (std::size_t i = 0; i < spec.part_count; ++i) {
        SynthPart part = synth_build_part(spec, seed, i);
        const std::string id = part_id(i);
        const std::filesystem::path mesh_path = mesh_dir / (id + ".stl");
        part.mesh.name = id;
        write_stl_binary(part.mesh, mesh_path);
        records.push_back(record_for(part, id, std::filesystem::absolute(mesh_path)));
    }
    write_manifest(records, out_dir / "manifest.jsonl");
    return records;
}

namespace {

std::vector<PartRecord> write_sweep(const std::vector<SynthPart>& parts,
                                    const std::vector<std::string>& ids,
                                    const std::filesystem::path& out_dir) {
    const std::filesystem::path mesh_dir = out_dir / "meshes";
    std::filesystem::create_directories(mesh_dir);
    std::vector<PartRecord> records;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::filesystem::path mesh_path = mesh_dir / (ids[i] + ".stl");
        TriangleMesh mesh = parts[i].mesh;
        mesh.name = ids[i];
        write_stl_binary(mesh, mesh_path);
        records.push_back(record_for(parts[i], ids[i], std::filesystem::absolute(mesh_path)));
    }
    write_manifest(records, out_dir / "manifest.jsonl");
    return records;
}

} // namespace

std::vector<PartRecord> synth_depth_sweep(const std::filesystem::path& out_dir) {
    std::vector<SynthPart> parts;
    std::vector<std::string> ids;
    for (double depth : {10.0, 20.0, 30.0}) {
        ColumnCut cut;
        cut.kind = FeatureKind::rect_pocket;
        cut.has_cut = true;
        cut.depth = depth;
        cut.z_lo = 40.0 - depth;
        cut.footprint = make_rect_loop(20.0, 20.0, 60.0, 60.0);
        parts.push_back(build_block(80.0, 80.0, 40.0, "steel", {cut}));
        char buf[32];
        std::snprintf(buf, sizeof buf, "depth_%02d", static_cast<int>(depth));
        ids.emplace_back(buf);
    }
    return write_sweep(parts, ids, out_dir);
}

std::vector<PartRecord> synth_round_sweep(const std::filesystem::path& out_dir) {
    std::vector<SynthPart> parts;
    std::vector<std::string> ids;
    for (double radius : {3.0, 8.0, 13.0}) {
        ColumnCut cut;
        cut.kind = FeatureKind::blind_hole;
        cut.has_cut = true;
        cut.depth = 15.0;
        cut.z_lo = 40.0 - 15.0;
        cut.radius = radius;
        cut.footprint = make_ngon(40.0, 40.0, radius);
        parts.push_back(build_block(80.0, 80.0, 40.0, "steel", {cut}));
        char buf[32];
        std::snprintf(buf, sizeof buf, "round_%02d", static_cast<int>(radius));
        ids.emplace_back(buf);
    }
    return write_sweep(parts, ids, out_dir);
}

} // namespace cncost
