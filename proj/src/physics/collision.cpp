#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "vtui/physics/contact.hpp"

namespace vtui::physics {

using Kind = CollisionShape::Kind;

namespace {

constexpr std::size_t kMaxManifold = 4;

struct WorldPlane {
  Vec3 n;
  double d;
};

WorldPlane world_plane(const Body& b) {
  Vec3 n = b.state.pose.orientation * b.shape.normal;
  return {n, b.shape.offset + n.dot(b.state.pose.position)};
}

/// Contacts are produced in (first, second) argument order with the normal
/// pointing first→second; `sink` relabels them to ascending body ids.
struct Sink {
  std::vector<Contact>& out;
  BodyId first;
  BodyId second;

  void add(const Vec3& point, const Vec3& normal, double penetration) const {
    Contact c;
    c.point = point;
    c.penetration = std::max(penetration, 0.0);
    if (first < second) {
      c.body_a = first;
      c.body_b = second;
      c.normal = normal;
    } else {
      c.body_a = second;
      c.body_b = first;
      c.normal = -normal;
    }
    out.push_back(c);
  }
};

void sphere_sphere(const Body& a, const Body& b, const Sink& sink) {
  Vec3 d = b.state.pose.position - a.state.pose.position;
  double dist = d.norm();
  double ra = a.shape.radius, rb = b.shape.radius;
  if (dist > ra + rb) return;
  Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3(Vec3::UnitZ());
  double pen = ra + rb - dist;
  sink.add(a.state.pose.position + n * (ra - 0.5 * pen), n, pen);
}

void sphere_plane(const Body& s, const Body& p, const Sink& sink) {
  auto pl = world_plane(p);
  const Vec3& c = s.state.pose.position;
  double dist = c.dot(pl.n) - pl.d - s.shape.radius;
  if (dist > 0.0) return;
  double pen = -dist;
  sink.add(c - pl.n * (s.shape.radius - 0.5 * pen), -pl.n, pen);
}

void sphere_box(const Body& s, const Body& bx, const Sink& sink) {
  const Quat& q = bx.state.pose.orientation;
  const Vec3& cb = bx.state.pose.position;
  const Vec3& h = bx.shape.half;
  const double r = s.shape.radius;
  Vec3 local = q.conjugate() * (s.state.pose.position - cb);
  Vec3 closest = local.cwiseMax(-h).cwiseMin(h);
  Vec3 diff = local - closest;
  double dist = diff.norm();
  Vec3 n_box_to_sphere;
  Vec3 surface;
  double pen;
  if (dist > 1e-12) {
    if (dist > r) return;
    n_box_to_sphere = diff / dist;
    surface = closest;
    pen = r - dist;
  } else {
    int axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      double gap = h[i] - std::abs(local[i]);
      if (gap < best) {
        best = gap;
        axis = i;
      }
    }
    double sign = local[axis] >= 0.0 ? 1.0 : -1.0;
    n_box_to_sphere = Vec3::Unit(axis) * sign;
    surface = local;
    surface[axis] = sign * h[axis];
    pen = r + best;
  }
  Vec3 n_world = q * n_box_to_sphere;
  Vec3 point = cb + q * surface - n_world * (0.5 * pen);
  sink.add(point, -n_world, pen);
}

std::array<Vec3, 8> box_corners(const Body& b) {
  std::array<Vec3, 8> c;
  const Vec3& h = b.shape.half;
  for (int i = 0; i < 8; ++i) {
    Vec3 s((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
    c[i] = b.state.pose.apply(s);
  }
  return c;
}

struct ManifoldPoint {
  Vec3 point;
  double pen;
};

/// Keeps at most four points spanning the largest area, deepest first.
void reduce_manifold(std::vector<ManifoldPoint>& pts) {
  if (pts.size() <= kMaxManifold) return;
  std::vector<std::size_t> keep;
  auto pick = [&](auto score) {
    std::size_t best = pts.size();
    double best_score = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(keep.begin(), keep.end(), i) != keep.end()) continue;
      double s = score(pts[i].point, pts[i].pen);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    keep.push_back(best);
  };
  pick([](const Vec3&, double pen) { return pen; });
  const Vec3 p0 = pts[keep[0]].point;
  pick([&](const Vec3& p, double) { return (p - p0).squaredNorm(); });
  const Vec3 p1 = pts[keep[1]].point;
  pick([&](const Vec3& p, double) { return (p1 - p0).cross(p - p0).squaredNorm(); });
  const Vec3 p2 = pts[keep[2]].point;
  pick([&](const Vec3& p, double) {
    return std::min({(p - p0).squaredNorm(), (p - p1).squaredNorm(), (p - p2).squaredNorm()});
  });
  std::sort(keep.begin(), keep.end());
  std::vector<ManifoldPoint> out;
  for (auto i : keep) out.push_back(pts[i]);
  pts = std::move(out);
}

void box_plane(const Body& bx, const Body& p, const Sink& sink) {
  auto pl = world_plane(p);
  std::vector<ManifoldPoint> pts;
  for (const auto& c : box_corners(bx)) {
    double dist = c.dot(pl.n) - pl.d;
    if (dist <= 0.0) pts.push_back({c - pl.n * (0.5 * dist), -dist});
  }
  reduce_manifold(pts);
  for (const auto& m : pts) sink.add(m.point, -pl.n, m.pen);
}

// --- box/box: separating axis test with face clipping ----------------------

using Polygon = std::vector<Vec3>;

Polygon clip(const Polygon& poly, const Vec3& n, double offset) {
  // Keeps the part with n·x <= offset.
  Polygon out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec3& p = poly[i];
    const Vec3& q = poly[(i + 1) % poly.size()];
    double dp = n.dot(p) - offset;
    double dq = n.dot(q) - offset;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (q - p) * (dp / (dp - dq)));
  }
  return out;
}

struct BoxFrame {
  Mat3 R;
  Vec3 c;
  Vec3 h;
};

BoxFrame frame_of(const Body& b) {
  return {b.state.pose.orientation.toRotationMatrix(), b.state.pose.position, b.shape.half};
}

/// `ref` face whose outward normal is closest to `n` against the most
/// anti-parallel face of `inc`. Returns points with their penetration.
std::vector<ManifoldPoint> clip_faces(const BoxFrame& ref, const BoxFrame& inc, const Vec3& n) {
  int ri = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    double d = std::abs(ref.R.col(i).dot(n));
    if (d > best) {
      best = d;
      ri = i;
    }
  }
  double rs = ref.R.col(ri).dot(n) >= 0.0 ? 1.0 : -1.0;
  Vec3 fn = ref.R.col(ri) * rs;
  Vec3 fc = ref.c + fn * ref.h[ri];

  int ii = 0;
  best = -1.0;
  for (int i = 0; i < 3; ++i) {
    double d = std::abs(inc.R.col(i).dot(fn));
    if (d > best) {
      best = d;
      ii = i;
    }
  }
  double is = inc.R.col(ii).dot(fn) >= 0.0 ? -1.0 : 1.0;
  Vec3 ic = inc.c + inc.R.col(ii) * (is * inc.h[ii]);
  int u = (ii + 1) % 3, v = (ii + 2) % 3;
  Vec3 eu = inc.R.col(u) * inc.h[u];
  Vec3 ev = inc.R.col(v) * inc.h[v];
  Polygon poly = {ic + eu + ev, ic - eu + ev, ic - eu - ev, ic + eu - ev};

  for (int k : {(ri + 1) % 3, (ri + 2) % 3}) {
    Vec3 axis = ref.R.col(k);
    double center = axis.dot(ref.c);
    poly = clip(poly, axis, center + ref.h[k]);
    if (poly.empty()) break;
    poly = clip(poly, -axis, -center + ref.h[k]);
    if (poly.empty()) break;
  }

  std::vector<ManifoldPoint> pts;
  double plane = fn.dot(fc);
  for (const auto& p : poly) {
    double pen = plane - fn.dot(p);
    if (pen >= 0.0) pts.push_back({p + fn * (0.5 * pen), pen});
  }
  reduce_manifold(pts);
  return pts;
}

void closest_segment_points(const Vec3& pa, const Vec3& ua, double la, const Vec3& pb, const Vec3& ub, double lb,
                            Vec3& qa, Vec3& qb) {
  Vec3 r = pa - pb;
  double b = ua.dot(ub);
  double c = ua.dot(r);
  double f = ub.dot(r);
  double denom = 1.0 - b * b;
  double s = denom > 1e-12 ? (b * f - c) / denom : 0.0;
  s = std::clamp(s, -la, la);
  double t = std::clamp(b * s + f, -lb, lb);
  s = std::clamp(b * t - c, -la, la);
  qa = pa + ua * s;
  qb = pb + ub * t;
}

void box_box(const Body& A, const Body& B, const Sink& sink) {
  BoxFrame a = frame_of(A), b = frame_of(B);
  Vec3 d = b.c - a.c;

  enum class Type { FaceA, FaceB, Edge };
  double best_pen = std::numeric_limits<double>::infinity();
  Vec3 best_axis = Vec3::UnitZ();
  Type best_type = Type::FaceA;
  int edge_i = 0, edge_j = 0;

  auto test = [&](Vec3 L, Type type, int i, int j) -> bool {
    double len = L.norm();
    if (len < 1e-9) return true;
    L /= len;
    double ra = 0.0, rb = 0.0;
    for (int k = 0; k < 3; ++k) {
      ra += a.h[k] * std::abs(a.R.col(k).dot(L));
      rb += b.h[k] * std::abs(b.R.col(k).dot(L));
    }
    double dist = d.dot(L);
    double pen = ra + rb - std::abs(dist);
    if (pen < 0.0) return false;
    // Face axes win ties so resting contacts keep stable face manifolds.
    double scale = type == Type::FaceA ? 1.0 : type == Type::FaceB ? 0.98 : 0.95;
    if (pen < best_pen * scale - 1e-7 || (type == Type::FaceA && pen < best_pen)) {
      best_pen = pen;
      best_axis = dist < 0.0 ? Vec3(-L) : L;
      best_type = type;
      edge_i = i;
      edge_j = j;
    }
    return true;
  };

  for (int i = 0; i < 3; ++i) {
    if (!test(a.R.col(i), Type::FaceA, i, 0)) return;
  }
  for (int i = 0; i < 3; ++i) {
    if (!test(b.R.col(i), Type::FaceB, i, 0)) return;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!test(a.R.col(i).cross(b.R.col(j)), Type::Edge, i, j)) return;
    }
  }

  const Vec3 n = best_axis;  // A→B
  if (best_type == Type::FaceA) {
    for (const auto& m : clip_faces(a, b, n)) sink.add(m.point, n, m.pen);
  } else if (best_type == Type::FaceB) {
    for (const auto& m : clip_faces(b, a, -n)) sink.add(m.point, n, m.pen);
  } else {
    Vec3 pa = a.c, pb = b.c;
    for (int k = 0; k < 3; ++k) {
      if (k != edge_i) pa += a.R.col(k) * (a.h[k] * (a.R.col(k).dot(n) >= 0.0 ? 1.0 : -1.0));
      if (k != edge_j) pb += b.R.col(k) * (b.h[k] * (b.R.col(k).dot(n) >= 0.0 ? -1.0 : 1.0));
    }
    Vec3 qa, qb;
    closest_segment_points(pa, a.R.col(edge_i), a.h[edge_i], pb, b.R.col(edge_j), b.h[edge_j], qa, qb);
    sink.add(0.5 * (qa + qb), n, best_pen);
  }
}

}  // namespace

CollisionShape CollisionShape::from_geometry(const scene::GeometryPrimitive& g) {
  CollisionShape s;
  if (auto* b = std::get_if<scene::Box>(&g)) {
    s.kind = Kind::Box;
    s.half = b->half_extents;
  } else if (auto* sp = std::get_if<scene::Sphere>(&g)) {
    s.kind = Kind::Sphere;
    s.radius = sp->radius;
  } else if (auto* c = std::get_if<scene::Cylinder>(&g)) {
    s.kind = Kind::Box;
    s.half = Vec3(c->radius, c->radius, c->half_length);
  } else {
    const auto& p = std::get<scene::StaticPlane>(g);
    s.kind = Kind::Plane;
    s.normal = p.normal;
    s.offset = p.offset;
  }
  return s;
}

void collide(const Body& a, const Body& b, std::vector<Contact>& out) {
  if (a.is_static() && b.is_static()) return;
  // Dispatch on the ordered kind pair; swap so the first shape has the lower kind.
  const Body* first = &a;
  const Body* second = &b;
  if (static_cast<int>(first->shape.kind) > static_cast<int>(second->shape.kind)) std::swap(first, second);
  Sink sink{out, first->id, second->id};
  auto k1 = first->shape.kind, k2 = second->shape.kind;
  if (k1 == Kind::Sphere && k2 == Kind::Sphere) sphere_sphere(*first, *second, sink);
  else if (k1 == Kind::Sphere && k2 == Kind::Box) sphere_box(*first, *second, sink);
  else if (k1 == Kind::Sphere && k2 == Kind::Plane) sphere_plane(*first, *second, sink);
  else if (k1 == Kind::Box && k2 == Kind::Box) box_box(*first, *second, sink);
  else if (k1 == Kind::Box && k2 == Kind::Plane) box_plane(*first, *second, sink);
}

Aabb world_aabb(const Body& b) {
  Aabb box;
  const Vec3& c = b.state.pose.position;
  switch (b.shape.kind) {
    case Kind::Sphere:
      box.lo = c.array() - b.shape.radius;
      box.hi = c.array() + b.shape.radius;
      break;
    case Kind::Box: {
      Mat3 R = b.state.pose.orientation.toRotationMatrix();
      Vec3 ext = R.cwiseAbs() * b.shape.half;
      box.lo = c - ext;
      box.hi = c + ext;
      break;
    }
    case Kind::Plane:
      break;
  }
  return box;
}

}  // namespace vtui::physics
