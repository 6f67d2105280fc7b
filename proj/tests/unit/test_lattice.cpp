#include <doctest.h>

#include <map>

#include "latgauge/error.hpp"
#include "latgauge/lattice.hpp"
#include "oracles.hpp"

using namespace latgauge;

TEST_SUITE("lattice") {
  TEST_CASE("counts") {
    const auto a = build_lattice({2, 2});
    CHECK(a.num_sites() == 4);
    CHECK(a.num_links() == 8);
    CHECK(a.num_plaquettes() == 4);
    const auto b = build_lattice({2, 2, 2});
    CHECK(b.num_sites() == 8);
    CHECK(b.num_links() == 24);
    CHECK(b.num_plaquettes() == 24);
  }

  TEST_CASE("degenerate and unsupported shapes") {
    auto kind = [](std::vector<int> dims) {
      try {
        (void)build_lattice(std::move(dims));
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::kParse;
    };
    CHECK(kind({3, 1}) == ErrorKind::kDegenerateLattice);
    CHECK(kind({2}) == ErrorKind::kInvalidParameter);
    CHECK(kind({2, 2, 2, 2}) == ErrorKind::kInvalidParameter);
    CHECK_THROWS_AS((void)plaquette_cycle(build_lattice({2, 2}), 4), Error);
    CHECK_THROWS_AS((void)plaquette_cycle(build_lattice({2, 2}), -1), Error);
  }

  TEST_CASE("origin plaquette on [2,2]") {
    const auto g = build_lattice({2, 2});
    const auto p = plaquette_cycle(g, 0);
    const int origin = g.site_index(std::vector<int>{0, 0});
    const int x10 = g.site_index(std::vector<int>{1, 0});
    const int x01 = g.site_index(std::vector<int>{0, 1});
    CHECK(p[0] == SignedLink{g.link_index(origin, 0), 1});
    CHECK(p[1] == SignedLink{g.link_index(x10, 1), 1});
    CHECK(p[2] == SignedLink{g.link_index(x01, 0), -1});
    CHECK(p[3] == SignedLink{g.link_index(origin, 1), -1});
  }

  TEST_CASE("every link of [2,2] lies in exactly two plaquettes") {
    const auto g = build_lattice({2, 2});
    std::map<int, int> seen;
    for (int p = 0; p < g.num_plaquettes(); ++p)
      for (const auto& sl : g.plaquette(p)) ++seen[sl.link];
    CHECK(seen.size() == 8);
    for (const auto& [l, n] : seen) CHECK(n == 2);
    for (int l = 0; l < g.num_links(); ++l) CHECK(g.coboundary(l).size() == 2);
  }

  TEST_CASE("matches the coordinate-built torus") {
    for (const auto& dims : std::vector<std::vector<int>>{{2, 2}, {3, 2}, {3, 3}, {2, 3, 2}, {3, 3, 3}}) {
      const auto g = build_lattice(dims);
      const oracle::Torus t(dims);
      REQUIRE(g.num_plaquettes() == static_cast<int>(t.plaquettes.size()));
      for (int p = 0; p < g.num_plaquettes(); ++p) {
        for (int i = 0; i < 4; ++i) {
          CHECK(g.plaquette(p)[i].link == t.plaquettes[p][i].first);
          CHECK(g.plaquette(p)[i].sign == t.plaquettes[p][i].second);
        }
      }
      for (int l = 0; l < g.num_links(); ++l) {
        CHECK(g.link_source(l) == t.ends[l].first);
        CHECK(g.link_target(l) == t.ends[l].second);
      }
    }
  }

  TEST_CASE("property: counts, closed cycles, incidence, determinism") {
    for (int L0 = 2; L0 <= 4; ++L0) {
      for (int L1 = 2; L1 <= 4; ++L1) {
        for (int L2 : {0, 2, 3}) {
          std::vector<int> dims{L0, L1};
          if (L2 > 0) dims.push_back(L2);
          const auto g = build_lattice(dims);
          const int d = g.dimension();
          CAPTURE(dims);
          CHECK(g.num_links() == d * g.num_sites());
          CHECK(g.num_plaquettes() == g.num_sites() * d * (d - 1) / 2);
          for (int s = 0; s < g.num_sites(); ++s) {
            CHECK(g.incidence(s).size() == static_cast<std::size_t>(2 * d));
            for (const auto& sl : g.incidence(s)) {
              CHECK((sl.sign > 0 ? g.link_source(sl.link) : g.link_target(sl.link)) == s);
            }
          }
          for (int p = 0; p < g.num_plaquettes(); ++p) {
            const auto cyc = plaquette_cycle(g, p);
            // walk the cycle as site-to-site moves
            int at = cyc[0].sign > 0 ? g.link_source(cyc[0].link) : g.link_target(cyc[0].link);
            const int start = at;
            for (const auto& sl : cyc) {
              const int from = sl.sign > 0 ? g.link_source(sl.link) : g.link_target(sl.link);
              CHECK(from == at);
              at = sl.sign > 0 ? g.link_target(sl.link) : g.link_source(sl.link);
            }
            CHECK(at == start);
            // boundary of the signed chain vanishes at every site
            std::map<int, int> boundary;
            for (const auto& sl : cyc) {
              boundary[g.link_target(sl.link)] += sl.sign;
              boundary[g.link_source(sl.link)] -= sl.sign;
            }
            for (const auto& [s, v] : boundary) CHECK(v == 0);
          }
          const auto again = build_lattice(dims);
          for (int p = 0; p < g.num_plaquettes(); ++p) CHECK(again.plaquette(p) == g.plaquette(p));
        }
      }
    }
  }

  TEST_CASE("reversed cycle is the sign-flipped reversed list") {
    const auto g = build_lattice({3, 2});
    for (int p = 0; p < g.num_plaquettes(); ++p) {
      auto cyc = plaquette_cycle(g, p);
      std::array<SignedLink, 4> rev{};
      for (int i = 0; i < 4; ++i) rev[i] = SignedLink{cyc[3 - i].link, -cyc[3 - i].sign};
      // walking rev also closes
      int at = rev[0].sign > 0 ? g.link_source(rev[0].link) : g.link_target(rev[0].link);
      const int start = at;
      for (const auto& sl : rev) at = sl.sign > 0 ? g.link_target(sl.link) : g.link_source(sl.link);
      CHECK(at == start);
    }
  }
}
