#include <sstream>
#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "cmdp/gallery.hpp"
#include "cmdp/instance_io.hpp"
#include "helpers.hpp"

using namespace cmdp;

namespace {

std::string render(const ConfoundedMDP& m) {
  std::ostringstream os;
  write_instance(os, m);
  return os.str();
}

ConfoundedMDP parse(const std::string& text) {
  std::istringstream in(text);
  return read_instance(in);
}

/// Replace the first occurrence of `from` with `to`; the test fails if absent.
std::string patched(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("gallery instances round-trip bit-exactly", "[io]") {
  for (const char* name : {"TRAP-2", "TRAP-2-H2", "BD-2", "CH-2", "FD-2", "CANON(4,2)"}) {
    CAPTURE(name);
    const auto m = gallery_get(name);
    const std::string once = render(m);
    const auto back = parse(once);
    // Field-for-field equality of everything that defines the instance.
    CHECK(back.name == m.name);
    CHECK(back.mode == m.mode);
    CHECK(back.H == m.H);
    CHECK(back.nS == m.nS);
    CHECK(back.nA == m.nA);
    CHECK(back.nW == m.nW);
    CHECK(back.nU == m.nU);
    CHECK(back.nM == m.nM);
    CHECK(back.obs_map == m.obs_map);
    CHECK(back.init == m.init);
    CHECK(back.conf == m.conf);
    CHECK(back.behavior == m.behavior);
    CHECK(back.trans == m.trans);
    CHECK(back.reward == m.reward);
    CHECK(back.itrans == m.itrans);
    CHECK(back.ftrans == m.ftrans);
    CHECK(back.freward == m.freward);
    // write(read(write(m))) is byte-identical: %.17g is a fixed point.
    CHECK(render(back) == once);
  }
}

TEST_CASE("file round-trip and io errors", "[io]") {
  const auto dir = testutil::temp_dir("io");
  const auto m = gallery_get("BD-2");
  const std::string path = (dir / "bd2.txt").string();
  write_instance_file(path, m);
  const auto back = read_instance_file(path);
  CHECK(back.name == "BD-2");
  CHECK(back.trans == m.trans);
  CHECK_THROWS_AS(read_instance_file((dir / "missing.txt").string()), IoError);
}

TEST_CASE("comments and blank lines are ignored", "[io]") {
  std::string text = render(gallery_get("TRAP-2"));
  text = "# leading comment\n\n" + text + "\n# trailing comment\n\n";
  const auto m = parse(text);
  CHECK(m.name == "TRAP-2");
}

TEST_CASE("probability rows renormalize inside tolerance only", "[io]") {
  const auto m = gallery_get("TRAP-2");

  SECTION("tiny drift is absorbed") {
    // Row sum 1 + 5e-10 is inside the 1e-9 acceptance band and renormalized.
    const std::string text =
        patched(render(m), "begin conf\n0.5 0.5", "begin conf\n0.5000000005 0.5");
    const auto back = parse(text);
    CHECK(back.cf(0, 0, 0) == Catch::Approx(0.5).margin(1e-9));
    double sum = 0.0;
    for (int w = 0; w < back.nW; ++w) sum += back.cf(0, 0, w);
    CHECK(sum == Catch::Approx(1.0).margin(1e-14));
  }

  SECTION("visible drift is rejected with the line number") {
    const std::string text = patched(render(m), "begin conf\n0.5 0.5", "begin conf\n0.6 0.5");
    CHECK_THROWS_MATCHES(parse(text), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "probability row sums to")));
  }
}

TEST_CASE("malformed inputs are rejected with specific messages", "[io]") {
  const std::string base = render(gallery_get("TRAP-2"));
  using Catch::Matchers::ContainsSubstring;
  using Catch::Matchers::MessageMatches;

  SECTION("missing format header") {
    CHECK_THROWS_MATCHES(parse(patched(base, "format 1\n", "")), ValidationError,
                         MessageMatches(ContainsSubstring("missing 'format 1'")));
  }
  SECTION("unsupported format") {
    CHECK_THROWS_MATCHES(parse(patched(base, "format 1", "format 2")), ValidationError,
                         MessageMatches(ContainsSubstring("unsupported format 2")));
  }
  SECTION("unknown key") {
    CHECK_THROWS_MATCHES(parse(patched(base, "horizon 1", "horizn 1")), ValidationError,
                         MessageMatches(ContainsSubstring("unknown key 'horizn'")));
  }
  SECTION("malformed scalar") {
    CHECK_THROWS_MATCHES(parse(patched(base, "horizon 1", "horizon one")), ValidationError,
                         MessageMatches(ContainsSubstring("malformed value for 'horizon'")));
  }
  SECTION("non-numeric table entry") {
    CHECK_THROWS_MATCHES(parse(patched(base, "begin conf\n0.5 0.5", "begin conf\n0.5 x")),
                         ValidationError,
                         MessageMatches(ContainsSubstring("non-numeric value")));
  }
  SECTION("unknown section") {
    CHECK_THROWS_MATCHES(parse(patched(base, "begin conf", "begin config")), ValidationError,
                         MessageMatches(ContainsSubstring("unknown section 'config'")));
  }
  SECTION("duplicate section") {
    const std::string dup = base + "begin conf\n0.5 0.5\nend\n";
    CHECK_THROWS_MATCHES(parse(dup), ValidationError,
                         MessageMatches(ContainsSubstring("duplicate section 'conf'")));
  }
  SECTION("missing section") {
    const auto pos = base.find("begin reward");
    REQUIRE(pos != std::string::npos);
    CHECK_THROWS_MATCHES(parse(base.substr(0, pos)), ValidationError,
                         MessageMatches(ContainsSubstring("missing section 'reward'")));
  }
  SECTION("short section") {
    // TRAP-2 behavior has two rows; cut the section to one.
    const std::string text =
        patched(base, "begin behavior\n0.9", "begin behavior\nend\nbegin behavior\n0.9");
    CHECK_THROWS_AS(parse(text), ValidationError);
  }
  SECTION("wrong row width") {
    const std::string text = patched(base, "begin conf\n0.5 0.5", "begin conf\n0.25 0.25 0.5");
    CHECK_THROWS_MATCHES(
        parse(text), ValidationError,
        MessageMatches(ContainsSubstring("row has 3 values, expected 2")));
  }
  SECTION("reward outside the unit interval") {
    const std::string text = patched(base, "begin reward\n1 0", "begin reward\n1.5 0");
    CHECK_THROWS_MATCHES(parse(text), ValidationError,
                         MessageMatches(ContainsSubstring("reward outside [0,1]")));
  }
  SECTION("line numbers point at the offending line") {
    // The first conf row sits right after `begin conf`; find its 1-based line.
    std::istringstream count(base);
    std::string line;
    int n = 0, conf_row = -1;
    while (std::getline(count, line)) {
      ++n;
      if (line == "begin conf") conf_row = n + 1;
    }
    REQUIRE(conf_row > 0);
    const std::string text = patched(base, "begin conf\n0.5 0.5", "begin conf\n0.7 0.5");
    CHECK_THROWS_MATCHES(
        parse(text), ValidationError,
        MessageMatches(ContainsSubstring("line " + std::to_string(conf_row))));
  }
}

TEST_CASE("reward rows clamp rounding dust only", "[io]") {
  const std::string base = render(gallery_get("TRAP-2"));
  const std::string text = patched(base, "begin reward\n1 0", "begin reward\n1.0000000001 0");
  const auto m = parse(text);
  CHECK(m.rw(0, 0, 0, 0) == 1.0);
}

TEST_CASE("frontdoor files carry mediator sections", "[io]") {
  const std::string text = render(gallery_get("FD-2"));
  CHECK(text.find("mediators 2") != std::string::npos);
  CHECK(text.find("begin itrans") != std::string::npos);
  CHECK(text.find("begin ftrans") != std::string::npos);
  CHECK(text.find("begin freward") != std::string::npos);
  CHECK(text.find("obs_map") == std::string::npos);

  SECTION("frontdoor header requires mediators") {
    CHECK_THROWS_MATCHES(parse(patched(text, "mediators 2\n", "")), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "frontdoor instance needs 'mediators'")));
  }
}
