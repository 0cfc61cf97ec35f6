#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "idsa/idsa.h"

namespace {

// Frees a handle at scope exit.
template <class T, void (*Free)(T*)>
struct Owned {
  T* p = nullptr;
  ~Owned() { Free(p); }
  T** out() { return &p; }
  operator T*() const { return p; }
};

using Group = Owned<idsa_group, idsa_group_free>;
using Subset = Owned<idsa_subset, idsa_subset_free>;
using Col = Owned<idsa_colouring, idsa_colouring_free>;
using Op = Owned<idsa_operator, idsa_operator_free>;
using Freqs = Owned<idsa_freqs, idsa_freqs_free>;
using Step = Owned<idsa_step, idsa_step_free>;

void box1(const idsa_group* z, int64_t lo, int64_t hi, Subset& s) {
  REQUIRE(idsa_subset_box(z, &lo, &hi, s.out()) == IDSA_OK);
}

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(idsa_status_name(IDSA_OK)) == "ok");
  CHECK(std::string(idsa_status_name(IDSA_ERR_BUFFER_TOO_SMALL)) == "buffer_too_small");
  CHECK(std::string(idsa_version()).size() > 0);

  Group g;
  CHECK(idsa_group_create_zd(0, g.out()) == IDSA_ERR_INVALID_ARGUMENT);
  CHECK(g.p == nullptr);
  CHECK(std::string(idsa_last_error()).find("Z^d") != std::string::npos);

  REQUIRE(idsa_group_create_zd(2, g.out()) == IDSA_OK);
  CHECK(std::string(idsa_last_error()).empty());
  CHECK(idsa_group_rank(nullptr, nullptr) == IDSA_ERR_INVALID_ARGUMENT);
  int rank = 0;
  CHECK(idsa_group_rank(nullptr, &rank) == IDSA_ERR_INVALID_ARGUMENT);
  CHECK(std::string(idsa_last_error()) == "null group");
}

TEST_CASE("free accepts null") {
  idsa_group_free(nullptr);
  idsa_subset_free(nullptr);
  idsa_colouring_free(nullptr);
  idsa_operator_free(nullptr);
  idsa_freqs_free(nullptr);
  idsa_step_free(nullptr);
}

TEST_CASE("groups and subsets") {
  Group h;
  REQUIRE(idsa_group_create_h3(h.out()) == IDSA_OK);
  int rank = 0;
  CHECK(idsa_group_rank(h, &rank) == IDSA_OK);
  CHECK(rank == 3);

  const int64_t central[3] = {0, 0, 1};
  int64_t len = -1;
  CHECK(idsa_group_word_length(h, central, &len) == IDSA_OK);
  CHECK(len == 4);

  size_t b = 0;
  CHECK(idsa_group_ball_size(h, 2, &b) == IDSA_OK);
  CHECK(b == 17);
  CHECK(idsa_group_ball_size(h, -1, &b) == IDSA_ERR_INVALID_ARGUMENT);

  size_t gens = 0;
  CHECK(idsa_group_generators(h, nullptr, 0, &gens) == IDSA_ERR_BUFFER_TOO_SMALL);
  CHECK(gens == 4);
  std::vector<int64_t> gc(12);
  CHECK(idsa_group_generators(h, gc.data(), gc.size(), &gens) == IDSA_OK);
  CHECK(gc[0] == 1);
  CHECK(gc[3] == -1);

  for (int n = 1; n <= 4; ++n) {
    Subset q;
    REQUIRE(idsa_subset_folner(h, n, q.out()) == IDSA_OK);
    size_t size = 0, rb = 0;
    CHECK(idsa_subset_size(q, &size) == IDSA_OK);
    CHECK(size == static_cast<size_t>(n * n * n * n));
    CHECK(idsa_subset_right_generator_boundary(q, &rb) == IDSA_OK);
    CHECK(rb == static_cast<size_t>(5 * n * n * n - 2 * n * n + n));
  }

  Subset q3;
  REQUIRE(idsa_subset_folner(h, 3, q3.out()) == IDSA_OK);
  int64_t diam = 0;
  CHECK(idsa_subset_diameter(q3, &diam) == IDSA_OK);
  CHECK(diam == 13);

  std::vector<int64_t> coords(3);
  CHECK(idsa_subset_elements(q3, coords.data(), coords.size()) == IDSA_ERR_BUFFER_TOO_SMALL);
  coords.resize(81 * 3);
  CHECK(idsa_subset_elements(q3, coords.data(), coords.size()) == IDSA_OK);
  CHECK(coords[0] == 0);
  CHECK(coords.back() == 8);

  Subset again;
  REQUIRE(idsa_subset_from_elements(h, coords.data(), 81, again.out()) == IDSA_OK);
  size_t n_again = 0;
  CHECK(idsa_subset_size(again, &n_again) == IDSA_OK);
  CHECK(n_again == 81);

  Subset shrunk;
  REQUIRE(idsa_subset_shrink(q3, 1, shrunk.out()) == IDSA_OK);
  size_t inner = 0, bd = 0;
  CHECK(idsa_subset_size(shrunk, &inner) == IDSA_OK);
  CHECK(idsa_subset_boundary_size(q3, 1, 1, &bd) == IDSA_OK);
  CHECK(inner + bd == 81);
  CHECK(idsa_subset_boundary_size(q3, 1, 7, &bd) == IDSA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("colourings through the C layer") {
  Group z;
  REQUIRE(idsa_group_create_zd(1, z.out()) == IDSA_OK);
  Col c;
  REQUIRE(idsa_colouring_half_line_mod3(0, 0, c.out()) == IDSA_OK);
  int colour = -1;
  const int64_t xs[] = {-3, -2, -1, 0, 5};
  const int expect[] = {0, 1, 1, 0, 0};
  for (int i = 0; i < 5; ++i) {
    CHECK(idsa_colouring_at(c, z, &xs[i], &colour) == IDSA_OK);
    CHECK(colour == expect[i]);
  }

  Col cut;
  REQUIRE(idsa_colouring_half_line_mod3(1, -100, cut.out()) == IDSA_OK);
  const int64_t far = -101;
  CHECK(idsa_colouring_at(cut, z, &far, &colour) == IDSA_OK);
  CHECK(colour == 0);

  const char* names[] = {"white", "black"};
  const uint64_t w[] = {1, 1};
  Col p1, p2;
  REQUIRE(idsa_colouring_percolation(names, w, 2, 42, p1.out()) == IDSA_OK);
  REQUIRE(idsa_colouring_percolation(names, w, 2, 42, p2.out()) == IDSA_OK);
  for (int64_t x = -20; x <= 20; ++x) {
    int a = -1, b = -2;
    CHECK(idsa_colouring_at(p1, z, &x, &a) == IDSA_OK);
    CHECK(idsa_colouring_at(p2, z, &x, &b) == IDSA_OK);
    CHECK(a == b);
  }
  size_t alpha = 0;
  CHECK(idsa_colouring_alphabet_size(p1, &alpha) == IDSA_OK);
  CHECK(alpha == 2);

  const int tile[] = {0, 1, 1};
  Col per;
  REQUIRE(idsa_colouring_periodic(z, 3, names, 2, tile, 3, per.out()) == IDSA_OK);
  const int64_t four = 4;
  CHECK(idsa_colouring_at(per, z, &four, &colour) == IDSA_OK);
  CHECK(colour == 1);
}

TEST_CASE("pattern frequencies") {
  Group z;
  REQUIRE(idsa_group_create_zd(1, z.out()) == IDSA_OK);
  Col c;
  REQUIRE(idsa_colouring_half_line_mod3(0, 0, c.out()) == IDSA_OK);
  Subset single, v;
  const int64_t zero = 0;
  REQUIRE(idsa_subset_from_elements(z, &zero, 1, single.out()) == IDSA_OK);
  box1(z, -30, -1, v);
  const int black = 1;
  double f = 0.0;
  char text[64];
  CHECK(idsa_empirical_frequency(c, single, &black, v, &f, text, sizeof text) == IDSA_OK);
  CHECK(f == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(std::string(text) == "2/3");
  char tiny[2];
  CHECK(idsa_empirical_frequency(c, single, &black, v, &f, tiny, sizeof tiny) == IDSA_ERR_BUFFER_TOO_SMALL);

  Freqs perc;
  const uint64_t w[] = {1, 1};
  REQUIRE(idsa_freqs_percolation(w, 2, perc.out()) == IDSA_OK);
  Subset triple;
  box1(z, 0, 2, triple);
  const int vals[] = {0, 1, 0};
  CHECK(idsa_freqs_pattern(perc, triple, vals, &f) == IDSA_OK);
  CHECK(f == 0.125);

  Freqs emp;
  REQUIRE(idsa_freqs_empirical(c, v, emp.out()) == IDSA_OK);
  CHECK(idsa_freqs_pattern(emp, single, &black, &f) == IDSA_OK);
  CHECK(f == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("operators and validation errors") {
  Group z;
  REQUIRE(idsa_group_create_zd(1, z.out()) == IDSA_OK);
  Op adj;
  REQUIRE(idsa_operator_adjacency(z, adj.out()) == IDSA_OK);
  int k = 0, m = 0, n = 0;
  CHECK(idsa_operator_info(adj, &k, &m, &n) == IDSA_OK);
  CHECK(k == 1);
  CHECK(m == 1);

  const int none[] = {0, 0};
  Op bad;
  CHECK(idsa_operator_percolation(z, none, 2, 1.0, bad.out()) == IDSA_ERR_INVALID_ARGUMENT);

  // Z slots: +1, -1, identity. Unequal weights on +1 and -1 break symmetry.
  const double asym[] = {1.0, 2.0, 0.0};
  CHECK(idsa_operator_colour_table(z, 1, asym, 3, bad.out()) == IDSA_ERR_VALIDATION);
  const double sym[] = {1.0, 1.0, 0.5};
  Op table;
  CHECK(idsa_operator_colour_table(z, 1, sym, 3, table.out()) == IDSA_OK);

  const int64_t offs[] = {1, -1};
  const double skew[] = {1.0, 2.0};
  CHECK(idsa_operator_periodic(z, 1, offs, skew, 2, bad.out()) == IDSA_ERR_VALIDATION);
  const double ok_blocks[] = {1.0, 1.0};
  Op fold;
  CHECK(idsa_operator_periodic(z, 1, offs, ok_blocks, 2, fold.out()) == IDSA_OK);

  Op lap;
  REQUIRE(idsa_operator_laplacian(adj, lap.out()) == IDSA_OK);
  Col triv;
  REQUIRE(idsa_colouring_trivial(triv.out()) == IDSA_OK);
  Subset seg;
  box1(z, 0, 9, seg);
  size_t count = 0;
  CHECK(idsa_eigenvalues(lap, triv, seg, 0.0, nullptr, 0, &count) == IDSA_ERR_BUFFER_TOO_SMALL);
  CHECK(count == 10);
  std::vector<double> ev(count);
  CHECK(idsa_eigenvalues(lap, triv, seg, 0.0, ev.data(), ev.size(), &count) == IDSA_OK);
  for (double e : ev) CHECK(e >= -1e-12);
  double nb = 0.0;
  CHECK(idsa_operator_norm_bound(lap, &nb) == IDSA_OK);
  CHECK(nb >= ev.back());
}

TEST_CASE("half-line mod-3 approximants through the C layer") {
  Group z;
  REQUIRE(idsa_group_create_zd(1, z.out()) == IDSA_OK);
  Col c;
  REQUIRE(idsa_colouring_half_line_mod3(0, 0, c.out()) == IDSA_OK);
  Op h;
  const int retained[] = {0, 1};
  REQUIRE(idsa_operator_percolation(z, retained, 2, 1.0, h.out()) == IDSA_OK);

  for (int j : {1, 5, 20}) {
    Subset v;
    box1(z, -3 * j, -1, v);
    Step s;
    idsa_approximant_info info{};
    REQUIRE(idsa_ids_approximant(h, c, v, 0, 0.0, s.out(), &info) == IDSA_OK);
    CHECK(info.volume == static_cast<size_t>(3 * j));
    CHECK(info.used_lanczos == 0);
    double y = 0.0;
    const double probes[] = {-1.5, -0.5, 0.5, 1.5};
    const double expect[] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    for (int i = 0; i < 4; ++i) {
      CHECK(idsa_step_eval(s, probes[i], &y) == IDSA_OK);
      CHECK(y == expect[i]);
    }
    size_t nb = 0;
    CHECK(idsa_step_size(s, &nb) == IDSA_OK);
    CHECK(nb == 3);
    double init = -1.0;
    std::vector<double> bps(nb), vals(nb);
    CHECK(idsa_step_data(s, &init, bps.data(), vals.data(), nb) == IDSA_OK);
    CHECK(init == 0.0);
    CHECK(bps[0] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(vals[2] == 1.0);

    size_t clusters = 0;
    std::vector<double> lam(3);
    std::vector<size_t> mult(3);
    CHECK(idsa_eigenvalue_clusters(h, c, v, 0.0, lam.data(), mult.data(), 3, &clusters) == IDSA_OK);
    CHECK(clusters == 3);
    for (size_t mu : mult) CHECK(mu == static_cast<size_t>(j));
  }

  Subset u1, u2;
  box1(z, 1, 3, u1);
  box1(z, 1, 30, u2);
  Step a, b;
  REQUIRE(idsa_ids_approximant(h, c, u1, 1, 0.0, a.out(), nullptr) == IDSA_OK);
  REQUIRE(idsa_ids_approximant(h, c, u2, 1, 0.0, b.out(), nullptr) == IDSA_OK);
  double d = -1.0;
  CHECK(idsa_step_sup_distance(a, b, &d) == IDSA_OK);
  CHECK(d == 0.0);

  Subset lone;
  box1(z, 0, 0, lone);
  Step empty;
  CHECK(idsa_ids_approximant(h, c, lone, 1, 0.0, empty.out(), nullptr) == IDSA_ERR_DOMAIN);
  CHECK(empty.p == nullptr);
}

TEST_CASE("certificate, frequency side and delta") {
  Group z;
  REQUIRE(idsa_group_create_zd(2, z.out()) == IDSA_OK);
  Col triv;
  REQUIRE(idsa_colouring_trivial(triv.out()) == IDSA_OK);
  Op adj;
  REQUIRE(idsa_operator_adjacency(z, adj.out()) == IDSA_OK);
  Freqs f;
  REQUIRE(idsa_freqs_trivial(f.out()) == IDSA_OK);
  Subset u, tile;
  REQUIRE(idsa_subset_folner(z, 12, u.out()) == IDSA_OK);
  REQUIRE(idsa_subset_folner(z, 2, tile.out()) == IDSA_OK);

  idsa_certificate cert{};
  REQUIRE(idsa_ids_certificate(adj, triv, u, tile, f, &cert) == IDSA_OK);
  // 11^2 placements of Q_2 inside Q_12, against frequency 1.
  CHECK(cert.freq_term == doctest::Approx(23.0 / 144.0));
  CHECK(cert.total == doctest::Approx(cert.tile_term + cert.folner_term + cert.freq_term + cert.renorm_term));
  // |boundary^1 Q_12| = 44 inner + 48 outer, over 144.
  CHECK(cert.renorm_term == doctest::Approx(44.0 / 144.0));

  Step side;
  double bound = 0.0;
  REQUIRE(idsa_frequency_side(adj, triv, tile, f, u, 0.0, side.out(), &bound) == IDSA_OK);
  double top = 0.0;
  CHECK(idsa_step_eval(side, 100.0, &top) == IDSA_OK);
  CHECK(top <= 1.0);

  idsa_delta delta{};
  REQUIRE(idsa_ids_delta(adj, triv, u, tile, f, u, 0.0, &delta) == IDSA_OK);
  CHECK(delta.measured <= delta.total);

  Group h;
  REQUIRE(idsa_group_create_h3(h.out()) == IDSA_OK);
  Subset hq;
  REQUIRE(idsa_subset_folner(h, 2, hq.out()) == IDSA_OK);
  CHECK(idsa_ids_certificate(adj, triv, hq, tile, f, &cert) == IDSA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("continuity gap") {
  Group z;
  REQUIRE(idsa_group_create_zd(2, z.out()) == IDSA_OK);
  const char* names[] = {"a", "b"};
  const uint64_t w[] = {1, 1};
  Col c;
  REQUIRE(idsa_colouring_percolation(names, w, 2, 7, c.out()) == IDSA_OK);
  const int keep[] = {1, 1};
  Op h, g;
  REQUIRE(idsa_operator_percolation(z, keep, 2, 1.0, h.out()) == IDSA_OK);
  REQUIRE(idsa_operator_percolation(z, keep, 2, 1.01, g.out()) == IDSA_OK);
  Subset u;
  REQUIRE(idsa_subset_folner(z, 10, u.out()) == IDSA_OK);
  idsa_continuity rep{};
  REQUIRE(idsa_continuity_gap(h, g, c, u, 0.01, 0.0, 1.0, 0.0, &rep) == IDSA_OK);
  CHECK(rep.gap <= rep.bound);
  CHECK(idsa_continuity_gap(h, g, c, u, 0.001, 0.0, 1.0, 0.0, &rep) == IDSA_ERR_PRECONDITION);
  CHECK(idsa_continuity_gap(h, g, c, u, 0.01, 0.0, 0.0, 0.0, &rep) == IDSA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("MatrixMarket export") {
  Group z;
  REQUIRE(idsa_group_create_zd(1, z.out()) == IDSA_OK);
  Col triv;
  REQUIRE(idsa_colouring_trivial(triv.out()) == IDSA_OK);
  Op adj;
  REQUIRE(idsa_operator_adjacency(z, adj.out()) == IDSA_OK);
  Subset seg;
  box1(z, 0, 2, seg);
  const std::string path = "capi_export_test.mtx";
  REQUIRE(idsa_export_matrix_market(adj, triv, seg, path.c_str()) == IDSA_OK);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
  CHECK(ss.str().find("3 3 2") != std::string::npos);
  std::remove(path.c_str());

  CHECK(idsa_export_matrix_market(adj, triv, seg, "/nonexistent-dir/x.mtx") == IDSA_ERR_IO);
}
