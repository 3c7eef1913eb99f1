#include <catch2/catch_amalgamated.hpp>

#include "kwitness/corpus.hpp"
#include "kwitness/io.hpp"

#include <cstdio>

using namespace kwitness;
using nlohmann::json;

namespace {

Matrix mat(int rows, int cols, std::initializer_list<long long> vals) {
  Matrix m(rows, cols);
  auto it = vals.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Scalar(*it++);
  return m;
}

NilMulticomplex sample_instance() {
  BinaryMulticomplex c = random_acyclic_binary(5, 1, 3, 2, RingSpec::localized_at(3));
  NilMulticomplex n = shift_nil(c);
  return n;
}

}  // namespace

TEST_CASE("scalars parse from strings and plain integers") {
  CHECK(io::scalar_from_json(json(5), "t") == Scalar(5));
  CHECK(io::scalar_from_json(json("-7"), "t") == Scalar(-7));
  CHECK(io::scalar_from_json(json("-3/7"), "t") == Scalar(-3, 7));
  CHECK(io::scalar_to_json(Scalar(-3, 7)) == json("-3/7"));
  CHECK_THROWS_AS(io::scalar_from_json(json("abc"), "t"), ParseError);
  CHECK_THROWS_AS(io::scalar_from_json(json("1/0"), "t"), ParseError);
  CHECK_THROWS_AS(io::scalar_from_json(json(1.5), "t"), ParseError);
  CHECK_THROWS_AS(io::bigint_from_json(json("12x"), "t"), ParseError);
  CHECK(io::bigint_from_json(json("123456789012345678901234567890"), "t") ==
        BigInt("123456789012345678901234567890"));
}

TEST_CASE("instances round-trip byte-identically") {
  NilMulticomplex n = sample_instance();
  std::string text = io::dump(io::instance_to_json(n));
  NilMulticomplex back = io::instance_from_json(io::parse_text(text));
  CHECK(back == n);
  CHECK(io::dump(io::instance_to_json(back)) == text);
}

TEST_CASE("instance files declare their format and ring") {
  NilMulticomplex n = sample_instance();
  json j = io::instance_to_json(n);
  CHECK(j["format"] == 1);
  CHECK(j["ring"]["kind"] == "LocalizedIntegers");
  CHECK(j["ring"]["prime"] == "3");

  json no_format = j;
  no_format.erase("format");
  CHECK_THROWS_AS(io::instance_from_json(no_format), ParseError);
  json wrong = j;
  wrong["format"] = 2;
  CHECK_THROWS_AS(io::instance_from_json(wrong), ParseError);
  json bad_ring = j;
  bad_ring["ring"] = json{{"kind", "Field"}};
  CHECK_THROWS_AS(io::instance_from_json(bad_ring), ParseError);
  json composite = j;
  composite["ring"] = json{{"kind", "LocalizedIntegers"}, {"prime", 6}};
  CHECK_THROWS_AS(io::instance_from_json(composite), ParseError);
}

TEST_CASE("malformed instance bodies are parse errors, not crashes") {
  json base = io::instance_to_json(nil_single(RingSpec::integers(), mat(1, 1, {0})));

  json j = base;
  j["dimension"] = "one";
  CHECK_THROWS_AS(io::instance_from_json(j), ParseError);

  j = base;
  j["ranks"][0]["rank"] = -2;
  CHECK_THROWS_AS(io::instance_from_json(j), ParseError);

  j = base;
  j["nil"] = json::array({json{{"position", json::array()},
                               {"matrix", json::array({json::array({"1", "0"}),
                                                       json::array({"0"})})}}});
  CHECK_THROWS_AS(io::instance_from_json(j), ParseError);

  CHECK_THROWS_AS(io::parse_text("{ not json"), ParseError);
  CHECK_THROWS_AS(io::load_json("/nonexistent/path.json"), ParseError);
}

TEST_CASE("certificates round-trip and verify identically") {
  NilMulticomplex n = nil_single(RingSpec::integers(), mat(2, 2, {0, 1, 0, 0}));
  Certificate cert = std::get<Certificate>(reduce_nil_generator(n, SplitStrategy::MaxIndex));
  std::string text = io::dump(io::certificate_to_json(cert));
  Certificate back = io::certificate_from_json(io::parse_text(text));
  CHECK(back == cert);
  CHECK(io::dump(io::certificate_to_json(back)) == text);
  Verdict v = verify_certificate(back);
  CHECK(v.accepted);
  CHECK(*v.combination == std::vector<BigInt>{1, -1, 1});
}

TEST_CASE("certificate parsing rejects duplicate ids and unknown step kinds") {
  NilMulticomplex n = nil_single(RingSpec::integers(), mat(2, 2, {0, 1, 0, 0}));
  Certificate cert = std::get<Certificate>(reduce_nil_generator(n, SplitStrategy::MaxIndex));
  json j = io::certificate_to_json(cert);

  json dup = j;
  dup["registry"].push_back(dup["registry"][0]);
  CHECK_THROWS_AS(io::certificate_from_json(dup), ParseError);

  json bad = j;
  bad["steps"][0]["kind"] = "Telescope";
  CHECK_THROWS_AS(io::certificate_from_json(bad), ParseError);
}

TEST_CASE("failure reports carry diagnostics and re-validate as instances") {
  BinaryMulticomplex c;
  c.ring = RingSpec::integers();
  c.dimension = 1;
  c.set_rank({0}, 1);
  c.set_rank({1}, 2);
  c.set_rank({2}, 1);
  c.set_diff_pair(1, {1}, mat(1, 2, {0, 1}));
  c.set_diff_pair(1, {2}, mat(2, 1, {1, 0}));
  NilMulticomplex n{c, {}};
  n.set_nil({1}, mat(2, 2, {0, 1, 0, 0}));

  auto out = reduce_nil_generator(n, SplitStrategy::MaxIndex);
  const auto& rf = std::get<ReductionFailure>(out);
  json j = io::failure_report_to_json(rf);
  CHECK(j["format"] == 1);
  CHECK(j["failure"]["strategy"] == "max-index");
  CHECK(j["failure"]["where"] == "sub");
  CHECK(j["failure"]["depth"] == 0);
  REQUIRE(j["failure"]["details"].is_array());
  CHECK_FALSE(j["failure"]["details"].empty());

  // the annotation block is ignored on re-parse; the instance itself is valid
  NilMulticomplex re = io::instance_from_json(io::parse_text(io::dump(j)));
  CHECK(re == rf.instance);
  CHECK(validate_nil(re).pass);
}

TEST_CASE("file save and load round-trip") {
  NilMulticomplex n = sample_instance();
  std::string path = "/tmp/kwitness_io_test_instance.json";
  io::save_text(path, io::dump(io::instance_to_json(n)));
  CHECK(io::load_instance(path) == n);
  std::remove(path.c_str());

  Certificate cert = std::get<Certificate>(
      reduce_nil_generator(nil_single(RingSpec::integers(), mat(2, 2, {0, 1, 0, 0})),
                           SplitStrategy::MaxIndex));
  path = "/tmp/kwitness_io_test_cert.json";
  io::save_text(path, io::dump(io::certificate_to_json(cert)));
  CHECK(io::load_certificate(path) == cert);
  std::remove(path.c_str());
}
