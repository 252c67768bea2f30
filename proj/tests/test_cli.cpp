#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cli_support.hpp"

using lemni::Cplx;
using lemni::cli::JobSpec;
using lemni::cli::JsonWriter;
using lemni::cli::parse_complex;
using lemni::cli::parse_complex_list;
using lemni::cli::ResolvedOptions;
using lemni::cli::run_job;

TEST_CASE("complex literal grammar") {
  CHECK(parse_complex("1") == Cplx(1, 0));
  CHECK(parse_complex("-2.5") == Cplx(-2.5, 0));
  CHECK(parse_complex("i") == Cplx(0, 1));
  CHECK(parse_complex("-i") == Cplx(0, -1));
  CHECK(parse_complex("2i") == Cplx(0, 2));
  CHECK(parse_complex("-3.5i") == Cplx(0, -3.5));
  CHECK(parse_complex("1+2i") == Cplx(1, 2));
  CHECK(parse_complex("3-i") == Cplx(3, -1));
  CHECK(parse_complex(" 1 + 2i ") == Cplx(1, 2));
  CHECK(parse_complex("1.5e-2+2e1i") == Cplx(0.015, 20));
  CHECK(parse_complex("-1e-3-2.5e-4i") == Cplx(-1e-3, -2.5e-4));

  CHECK_THROWS_AS(parse_complex(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_complex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_complex("1+2j"), std::invalid_argument);
  CHECK_THROWS_AS(parse_complex("1.2.3"), std::invalid_argument);

  const auto list = parse_complex_list("i, -i");
  REQUIRE(list.size() == 2);
  CHECK(list[0] == Cplx(0, 1));
  CHECK(list[1] == Cplx(0, -1));
}

TEST_CASE("json writer format") {
  JsonWriter w;
  w.begin_object();
  w.key("a").value(1.5);
  w.key("b").begin_array();
  w.value(true);
  w.value("x\"y");
  w.value(Cplx(0, -1));
  w.end_array();
  w.key("nested").begin_object().key("n").value(12).end_object();
  w.end_object();
  CHECK(w.take() ==
        "{\"a\":1.5,\"b\":[true,\"x\\\"y\",[0,-1]],\"nested\":{\"n\":12}}\n");

  CHECK(JsonWriter::format_double(0.1) == "0.1");
  CHECK(JsonWriter::format_double(-0.0) == "0");
  CHECK(JsonWriter::format_double(7.416298635) == "7.416298635");
  // twelve significant digits
  CHECK(JsonWriter::format_double(3.14159265358979) == "3.14159265359");
}

TEST_CASE("option bag") {
  ResolvedOptions o = ResolvedOptions::defaults();
  o.apply("quad_tol", 1e-6);
  CHECK(o.get("quad_tol") == 1e-6);
  CHECK_THROWS_AS(o.apply("no_such_key", 1.0), std::invalid_argument);
}

TEST_CASE("job validation") {
  JobSpec spec;
  spec.command = "length";
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);  // no polynomial
  spec.roots = parse_complex_list("i,-i");
  CHECK_NOTHROW(spec.validate());
  spec.coefficients = parse_complex_list("1,0,1");
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);  // both sources
  spec.coefficients.reset();
  spec.format = "svg";
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);  // svg for length

  JobSpec sphere;
  sphere.command = "sphere";
  CHECK_THROWS_AS(sphere.validate(), std::invalid_argument);

  JobSpec bogus;
  bogus.command = "frobnicate";
  CHECK_THROWS_AS(bogus.validate(), std::invalid_argument);
}

TEST_CASE("length job produces the expected figures") {
  JobSpec spec;
  spec.command = "length";
  spec.roots = parse_complex_list("i,-i");
  const std::string out = run_job(spec);
  CHECK(out.find("\"exact_integral\":7.41629863") != std::string::npos);
  CHECK(out.find("\"satisfies_alpha0_bound\":true") != std::string::npos);
  CHECK(out.find("\"connected\":true") != std::string::npos);
  // identical spec: byte-identical artifact
  CHECK(run_job(spec) == out);
}

TEST_CASE("trace svg has one path per component") {
  JobSpec spec;
  spec.command = "trace";
  spec.coefficients = parse_complex_list("1,0,0,1");  // z^3 + 1
  spec.format = "svg";
  const std::string svg = run_job(spec);
  std::size_t paths = 0, pos = 0;
  while ((pos = svg.find("<path", pos)) != std::string::npos) {
    ++paths;
    pos += 5;
  }
  CHECK(paths == 1);  // connected curve
  CHECK(svg.find("viewBox") != std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);  // the touch dot

  JobSpec two = spec;
  two.coefficients.reset();
  two.roots = parse_complex_list("2,-2");
  const std::string svg2 = run_job(two);
  paths = 0;
  pos = 0;
  while ((pos = svg2.find("<path", pos)) != std::string::npos) {
    ++paths;
    pos += 5;
  }
  CHECK(paths == 2);
}

TEST_CASE("report csv schema") {
  JobSpec spec;
  spec.command = "report";
  spec.format = "csv";
  spec.family = "zd";
  spec.dmax = 2;
  const std::string csv = run_job(spec);
  CHECK(csv.rfind("d,length,length_over_d,bound_alpha0_d,connected,max_crit_dist\n",
                  0) == 0);
  CHECK(csv.find("\n1,6.28318530718,") != std::string::npos);
}

TEST_CASE("job file round trip") {
  const char* path = "/tmp/lemni_test_job.json";
  {
    std::ofstream f(path);
    f << R"({"command":"length","polynomial":{"roots":"i,-i"},)"
      << R"("seed":5,"options":{"quad_tol":1e-7}})";
  }
  JobSpec spec = lemni::cli::job_from_file(path);
  CHECK(spec.command == "length");
  CHECK(spec.seed == 5);
  CHECK(spec.options.get("quad_tol") == 1e-7);
  const std::string out = run_job(spec);
  CHECK(out.find("\"seed\":5") != std::string::npos);
  std::remove(path);
}
