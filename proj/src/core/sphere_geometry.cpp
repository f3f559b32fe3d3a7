#include "sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace fpmorph {

namespace {

constexpr double kVisibleEps = 1e-12;   // strict visibility margin for hull faces
constexpr double kSpanningEps = 1e-9;   // min face-plane offset for "hull contains origin"
constexpr double kZeroEdgeEps = 1e-13;  // Voronoi edges shorter than this are contact points

inline std::uint64_t edge_key(int u, int v) {
  return (std::uint64_t(std::uint32_t(u)) << 32) | std::uint32_t(v);
}

// Signed spherical excess (solid angle) of the triangle (a, b, c).
inline double signed_excess(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = dot(a, cross(b, c));
  const double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(num, den);
}

// Interior subdivision points of the great-circle arc from p to q, following
// the minor arc or the complementary major arc, so that every sub-arc spans
// less than pi/2.
void append_arc_interior(const Vec3& p, const Vec3& q, bool major, std::vector<Vec3>& out) {
  const double theta = arc_angle(p, q);
  Vec3 e2 = q - p * dot(p, q);
  const double n2 = norm(e2);
  if (n2 < 1e-14) {
    if (dot(p, q) > 0.0) return;  // coincident endpoints, nothing to add
    throw std::invalid_argument("antipodal Voronoi vertices: degenerate tessellation");
  }
  e2 = e2 / n2;
  const double sweep = major ? theta - 2.0 * std::numbers::pi : theta;
  const int segs = std::max(1, int(std::ceil(std::abs(sweep) / (0.5 * std::numbers::pi))));
  for (int t = 1; t < segs; ++t) {
    const double phi = sweep * double(t) / double(segs);
    out.push_back(p * std::cos(phi) + e2 * std::sin(phi));
  }
}

struct Face {
  int a, b, c;
  Vec3 nrm;    // outward unit normal
  double off;  // dot(nrm, vertex) = distance of the face plane from the origin
  bool alive;
};

Face make_face(int a, int b, int c, const std::vector<Vec3>& pts, const Vec3& interior) {
  Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
  const double len = norm(n);
  if (len < 1e-15) throw std::invalid_argument("degenerate (collinear) hull face");
  n = n / len;
  double off = dot(n, pts[a]);
  if (dot(n, interior) > off) {  // flip to outward
    std::swap(b, c);
    n = n * -1.0;
    off = -off;
  }
  return {a, b, c, n, off, true};
}

}  // namespace

namespace detail {

std::vector<HullFace> convex_hull_unit_points(const std::vector<Vec3>& pts) {
  const int n = int(pts.size());
  if (n < 4) throw std::invalid_argument("spherical tessellation needs at least 4 points");

  // Initial tetrahedron: spread the first four vertices as far as possible.
  int p1 = -1;
  double best = 1e-12;
  for (int i = 1; i < n; ++i) {
    const double d = norm(pts[i] - pts[0]);
    if (d > best) {
      best = d;
      p1 = i;
    }
  }
  if (p1 < 0) throw std::invalid_argument("all points coincide");
  int p2 = -1;
  best = 1e-12;
  for (int i = 1; i < n; ++i) {
    if (i == p1) continue;
    const double d = norm(cross(pts[p1] - pts[0], pts[i] - pts[0]));
    if (d > best) {
      best = d;
      p2 = i;
    }
  }
  if (p2 < 0) throw std::invalid_argument("points are collinear");
  const Vec3 base_n = cross(pts[p1] - pts[0], pts[p2] - pts[0]);
  int p3 = -1;
  best = 1e-12;
  for (int i = 1; i < n; ++i) {
    if (i == p1 || i == p2) continue;
    const double d = std::abs(dot(base_n, pts[i] - pts[0]));
    if (d > best) {
      best = d;
      p3 = i;
    }
  }
  if (p3 < 0) {
    throw std::invalid_argument("points are coplanar: no valid spherical tessellation");
  }

  const Vec3 interior = (pts[0] + pts[p1] + pts[p2] + pts[p3]) / 4.0;
  std::vector<Face> faces;
  faces.reserve(std::size_t(2 * n));
  faces.push_back(make_face(0, p1, p2, pts, interior));
  faces.push_back(make_face(0, p1, p3, pts, interior));
  faces.push_back(make_face(0, p2, p3, pts, interior));
  faces.push_back(make_face(p1, p2, p3, pts, interior));

  // Deterministic insertion order, decorrelated from the input order.
  std::vector<int> order;
  order.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    if (i != 0 && i != p1 && i != p2 && i != p3) order.push_back(i);
  }
  std::uint64_t s = 0x9e3779b97f4a7c15ull ^ std::uint64_t(n);
  for (std::size_t k = order.size(); k > 1; --k) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    std::swap(order[k - 1], order[s % k]);
  }

  std::vector<int> visible;
  std::unordered_set<std::uint64_t> vis_edges;
  std::vector<std::pair<int, int>> horizon;
  for (const int p : order) {
    visible.clear();
    for (int f = 0; f < int(faces.size()); ++f) {
      if (faces[f].alive && dot(faces[f].nrm, pts[p]) - faces[f].off > kVisibleEps) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) {
      throw std::invalid_argument(
          "point inside or on the hull: coincident or coplanar-degenerate points");
    }
    vis_edges.clear();
    for (const int f : visible) {
      vis_edges.insert(edge_key(faces[f].a, faces[f].b));
      vis_edges.insert(edge_key(faces[f].b, faces[f].c));
      vis_edges.insert(edge_key(faces[f].c, faces[f].a));
    }
    horizon.clear();
    for (const int f : visible) {
      const int vs[3] = {faces[f].a, faces[f].b, faces[f].c};
      for (int e = 0; e < 3; ++e) {
        const int u = vs[e], v = vs[(e + 1) % 3];
        if (!vis_edges.count(edge_key(v, u))) horizon.emplace_back(u, v);
      }
    }
    for (const int f : visible) faces[f].alive = false;
    std::size_t reuse = 0;
    for (const auto& [u, v] : horizon) {
      Face nf = make_face(u, v, p, pts, interior);
      while (reuse < faces.size() && faces[reuse].alive) ++reuse;
      if (reuse < faces.size()) {
        faces[reuse] = nf;
      } else {
        faces.push_back(nf);
      }
    }
  }

  std::vector<HullFace> out;
  std::vector<char> used(std::size_t(n), 0);
  for (const Face& f : faces) {
    if (!f.alive) continue;
    out.push_back({f.a, f.b, f.c});
    used[std::size_t(f.a)] = used[std::size_t(f.b)] = used[std::size_t(f.c)] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!used[std::size_t(i)]) {
      throw std::invalid_argument(
          "point inside or on the hull: coincident or coplanar-degenerate points");
    }
  }
  return out;
}

}  // namespace detail

int SphereTessellation::neighbor_slot(int i, int j) const {
  const auto& nb = neighbors[std::size_t(i)];
  for (int s = 0; s < int(nb.size()); ++s) {
    if (nb[std::size_t(s)] == j) return s;
  }
  return -1;
}

double SphereTessellation::area_stddev() const {
  if (cell_area.empty()) return 0.0;
  double mean = 0.0;
  for (double a : cell_area) mean += a;
  mean /= double(cell_area.size());
  double var = 0.0;
  for (double a : cell_area) var += (a - mean) * (a - mean);
  return std::sqrt(var / double(cell_area.size()));
}

bool SphereTessellation::connected() const {
  const int n = size();
  if (n == 0) return false;
  std::vector<char> seen(std::size_t(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (int j : neighbors[std::size_t(i)]) {
      if (!seen[std::size_t(j)]) {
        seen[std::size_t(j)] = 1;
        ++count;
        q.push(j);
      }
    }
  }
  return count == n;
}

void SphereTessellation::validate() const {
  const int n = size();
  if (n < 4) throw std::invalid_argument("tessellation must have at least 4 cells");
  if (int(cell_area.size()) != n || int(neighbors.size()) != n ||
      int(face_length.size()) != n || int(chord_dist.size()) != n) {
    throw std::invalid_argument("tessellation arrays have inconsistent sizes");
  }
  double area_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(norm(points[std::size_t(i)]) - 1.0) > 1e-12) {
      throw std::invalid_argument("tessellation point is not on the unit sphere");
    }
    if (!(cell_area[std::size_t(i)] > 0.0)) {
      throw std::invalid_argument("non-positive Voronoi cell area");
    }
    area_sum += cell_area[std::size_t(i)];
    const auto& nb = neighbors[std::size_t(i)];
    if (nb.empty() || nb.size() != face_length[std::size_t(i)].size() ||
        nb.size() != chord_dist[std::size_t(i)].size()) {
      throw std::invalid_argument("adjacency arrays have inconsistent sizes");
    }
    for (int s = 0; s < int(nb.size()); ++s) {
      const int j = nb[std::size_t(s)];
      if (j < 0 || j >= n || j == i) throw std::invalid_argument("invalid neighbor index");
      const int back = neighbor_slot(j, i);
      if (back < 0) throw std::invalid_argument("asymmetric adjacency");
      const double rel = std::max(1.0, std::abs(face_length[std::size_t(i)][std::size_t(s)]));
      if (std::abs(face_length[std::size_t(i)][std::size_t(s)] -
                   face_length[std::size_t(j)][std::size_t(back)]) > 1e-12 * rel) {
        throw std::invalid_argument("asymmetric face length");
      }
      if (std::abs(chord_dist[std::size_t(i)][std::size_t(s)] -
                   chord_dist[std::size_t(j)][std::size_t(back)]) > 1e-12) {
        throw std::invalid_argument("asymmetric chord distance");
      }
      if (!(face_length[std::size_t(i)][std::size_t(s)] > 0.0) ||
          !(chord_dist[std::size_t(i)][std::size_t(s)] > 0.0)) {
        throw std::invalid_argument("non-positive face length or chord distance");
      }
    }
  }
  if (std::abs(area_sum - 4.0 * std::numbers::pi) > 1e-9 * 4.0 * std::numbers::pi) {
    throw std::invalid_argument("cell areas do not sum to the sphere area");
  }
  if (!connected()) throw std::invalid_argument("tessellation adjacency graph is disconnected");
}

SphereTessellation sphere_voronoi_geometry(std::vector<Vec3> points,
                                           std::vector<Vec3>* lloyd_centroids) {
  const int n = int(points.size());
  for (auto& p : points) {
    const double len = norm(p);
    if (std::abs(len - 1.0) > 1e-9) {
      throw std::invalid_argument("tessellation points must lie on the unit sphere");
    }
    p = p / len;
  }

  const auto hull = detail::convex_hull_unit_points(points);

  // Dual Voronoi vertices: outward unit normals of the hull faces.
  std::vector<Vec3> vv(hull.size());
  double min_off = 1e300;
  std::unordered_map<std::uint64_t, int> edge_face;
  edge_face.reserve(hull.size() * 3);
  std::vector<int> vert_face(std::size_t(n), -1);
  for (int f = 0; f < int(hull.size()); ++f) {
    const auto& [a, b, c] = hull[std::size_t(f)];
    const Vec3 nrm = cross(points[std::size_t(b)] - points[std::size_t(a)],
                           points[std::size_t(c)] - points[std::size_t(a)]);
    vv[std::size_t(f)] = normalized(nrm);
    min_off = std::min(min_off, dot(vv[std::size_t(f)], points[std::size_t(a)]));
    edge_face[edge_key(a, b)] = f;
    edge_face[edge_key(b, c)] = f;
    edge_face[edge_key(c, a)] = f;
    vert_face[std::size_t(a)] = vert_face[std::size_t(b)] = vert_face[std::size_t(c)] = f;
  }
  // When the hull strictly contains the origin every cell sits inside an open
  // hemisphere around its generator and every Voronoi edge is a minor arc.
  // Otherwise (points confined to a hemisphere) arcs are disambiguated by a
  // nearest-generator test on their midpoints.
  const bool spanning = min_off > kSpanningEps;

  SphereTessellation tess;
  tess.points = std::move(points);
  tess.cell_area.assign(std::size_t(n), 0.0);
  tess.neighbors.resize(std::size_t(n));
  tess.face_length.resize(std::size_t(n));
  tess.chord_dist.resize(std::size_t(n));
  if (lloyd_centroids) lloyd_centroids->assign(std::size_t(n), Vec3{});

  std::vector<int> cycle_faces, cycle_nbrs;
  std::vector<char> edge_major;
  std::vector<Vec3> poly;
  for (int i = 0; i < n; ++i) {
    cycle_faces.clear();
    cycle_nbrs.clear();
    const int f0 = vert_face[std::size_t(i)];
    int f = f0;
    do {
      // rotate the face to (i, s, t), preserving its cyclic order
      int a = hull[std::size_t(f)].a, b = hull[std::size_t(f)].b, c = hull[std::size_t(f)].c;
      if (b == i) {
        std::swap(a, b);
        std::swap(b, c);
      } else if (c == i) {
        std::swap(a, c);
        std::swap(b, c);
      }
      cycle_faces.push_back(f);
      cycle_nbrs.push_back(c);  // the next face around i shares the hull edge {i, t}
      const auto it = edge_face.find(edge_key(i, c));
      if (it == edge_face.end()) throw std::runtime_error("broken hull edge map");
      f = it->second;
    } while (f != f0);

    const int m = int(cycle_faces.size());
    edge_major.assign(std::size_t(m), 0);
    const Vec3& yi = tess.points[std::size_t(i)];
    for (int k = 0; k < m; ++k) {
      const Vec3& v1 = vv[std::size_t(cycle_faces[std::size_t(k)])];
      const Vec3& v2 = vv[std::size_t(cycle_faces[std::size_t((k + 1) % m)])];
      bool major = false;
      if (!spanning) {
        const Vec3 s = v1 + v2;
        if (norm(s) < 1e-9) {
          throw std::invalid_argument("antipodal Voronoi vertices: degenerate tessellation");
        }
        const Vec3 mid = normalized(s);
        const double di = dot(mid, yi);
        for (int q = 0; q < n; ++q) {
          if (dot(mid, tess.points[std::size_t(q)]) > di + 1e-12) {
            major = true;
            break;
          }
        }
      }
      edge_major[std::size_t(k)] = char(major);
      const double theta = arc_angle(v1, v2);
      const double length = major ? 2.0 * std::numbers::pi - theta : theta;
      if (length > kZeroEdgeEps) {
        const int j = cycle_nbrs[std::size_t(k)];
        tess.neighbors[std::size_t(i)].push_back(j);
        tess.face_length[std::size_t(i)].push_back(length);
        tess.chord_dist[std::size_t(i)].push_back(norm(yi - tess.points[std::size_t(j)]));
      }
    }

    // Expanded boundary polygon with all sub-arcs below pi/2, fanned from the
    // generator (cells are star-shaped about it).
    poly.clear();
    for (int k = 0; k < m; ++k) {
      const Vec3& v1 = vv[std::size_t(cycle_faces[std::size_t(k)])];
      const Vec3& v2 = vv[std::size_t(cycle_faces[std::size_t((k + 1) % m)])];
      poly.push_back(v1);
      append_arc_interior(v1, v2, edge_major[std::size_t(k)] != 0, poly);
    }
    double area = 0.0;
    Vec3 centroid{};
    for (int t = 0; t < int(poly.size()); ++t) {
      const Vec3& a = poly[std::size_t(t)];
      const Vec3& b = poly[std::size_t((t + 1) % poly.size())];
      const double exc = signed_excess(yi, a, b);
      area += exc;
      centroid += (yi + a + b) * (std::abs(exc) / 3.0);
    }
    tess.cell_area[std::size_t(i)] = std::abs(area);
    if (lloyd_centroids) {
      const double len = norm(centroid);
      (*lloyd_centroids)[std::size_t(i)] = len > 1e-12 ? centroid / len : yi;
    }
  }

  tess.validate();
  return tess;
}

void save_tessellation(const SphereTessellation& tess, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open tessellation cache for writing: " + path);
  const int n = tess.size();
  std::fprintf(fp, "fpmorph-tess 1\n");
  std::fprintf(fp, "n %d\n", n);
  std::fprintf(fp, "seed %llu\n", (unsigned long long)tess.seed);
  std::fprintf(fp, "iterations %d\n", tess.cvt_iterations);
  std::fprintf(fp, "points\n");
  for (int i = 0; i < n; ++i) {
    const Vec3& p = tess.points[std::size_t(i)];
    std::fprintf(fp, "%a %a %a %a\n", p.x, p.y, p.z, tess.cell_area[std::size_t(i)]);
  }
  std::fprintf(fp, "adjacency\n");
  for (int i = 0; i < n; ++i) {
    const auto& nb = tess.neighbors[std::size_t(i)];
    std::fprintf(fp, "%d %d", i, int(nb.size()));
    for (int s = 0; s < int(nb.size()); ++s) {
      std::fprintf(fp, " %d %a %a", nb[std::size_t(s)],
                   tess.face_length[std::size_t(i)][std::size_t(s)],
                   tess.chord_dist[std::size_t(i)][std::size_t(s)]);
    }
    std::fprintf(fp, "\n");
  }
  std::fprintf(fp, "end\n");
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write tessellation cache");
}

namespace {

double parse_double(std::istringstream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error(std::string("tessellation cache: missing ") + what);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error(std::string("tessellation cache: bad number for ") + what);
  }
  return v;
}

}  // namespace

SphereTessellation load_tessellation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tessellation cache: " + path);
  std::string line, tag;
  int version = 0;
  if (!std::getline(in, line)) throw std::runtime_error("tessellation cache: empty file");
  {
    std::istringstream is(line);
    is >> tag >> version;
    if (tag != "fpmorph-tess" || version != 1) {
      throw std::runtime_error("tessellation cache: unrecognized header");
    }
  }
  SphereTessellation tess;
  int n = 0;
  auto expect_kv = [&](const char* key) -> std::istringstream {
    if (!std::getline(in, line)) {
      throw std::runtime_error(std::string("tessellation cache: missing ") + key);
    }
    std::istringstream is(line);
    std::string k;
    is >> k;
    if (k != key) throw std::runtime_error(std::string("tessellation cache: expected ") + key);
    return is;
  };
  {
    auto is = expect_kv("n");
    is >> n;
    if (n < 4) throw std::runtime_error("tessellation cache: invalid point count");
  }
  {
    auto is = expect_kv("seed");
    unsigned long long s = 0;
    is >> s;
    tess.seed = s;
  }
  {
    auto is = expect_kv("iterations");
    is >> tess.cvt_iterations;
  }
  expect_kv("points");
  tess.points.resize(std::size_t(n));
  tess.cell_area.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("tessellation cache: truncated points");
    std::istringstream is(line);
    tess.points[std::size_t(i)].x = parse_double(is, "x");
    tess.points[std::size_t(i)].y = parse_double(is, "y");
    tess.points[std::size_t(i)].z = parse_double(is, "z");
    tess.cell_area[std::size_t(i)] = parse_double(is, "area");
  }
  expect_kv("adjacency");
  tess.neighbors.resize(std::size_t(n));
  tess.face_length.resize(std::size_t(n));
  tess.chord_dist.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("tessellation cache: truncated adjacency");
    }
    std::istringstream is(line);
    int idx = 0, deg = 0;
    is >> idx >> deg;
    if (idx != i || deg < 1) throw std::runtime_error("tessellation cache: bad adjacency row");
    for (int s = 0; s < deg; ++s) {
      int j = 0;
      if (!(is >> j)) throw std::runtime_error("tessellation cache: bad adjacency row");
      tess.neighbors[std::size_t(i)].push_back(j);
      tess.face_length[std::size_t(i)].push_back(parse_double(is, "face length"));
      tess.chord_dist[std::size_t(i)].push_back(parse_double(is, "chord distance"));
    }
  }
  tess.validate();
  return tess;
}

}  // namespace fpmorph
