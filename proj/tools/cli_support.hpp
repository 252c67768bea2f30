#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lemni/complex.hpp"
#include "lemni/levelset.hpp"
#include "lemni/spherical.hpp"

namespace lemni::cli {

/// Parses a comma-separated list of complex literals `a+bi` (whitespace
/// optional): "i,-i", "1+2i, 3-0.5i", "2.5e-1". Throws invalid_argument.
std::vector<Cplx> parse_complex_list(const std::string& text);
Cplx parse_complex(std::string token);

/// Minimal deterministic JSON emitter: insertion-ordered keys, floats
/// printed with 12 significant digits, no whitespace. Byte-identical
/// output for identical inputs is part of the CLI contract.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(long v);
  JsonWriter& value(std::size_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const char* v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const Cplx& z);  // [re, im]
  std::string take();

  static std::string format_double(double v);

 private:
  void separator();
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool expecting_value_ = false;
};

/// Flat option bag backing `--opt key=value`; unknown keys are rejected.
struct ResolvedOptions {
  std::map<std::string, double> values;

  static ResolvedOptions defaults();
  void apply(const std::string& key, double value);
  double get(const std::string& key) const;

  TraceOptions trace_options() const;
  SphereTraceOptions sphere_options() const;
};

/// One CLI job; built from flags or from a JSON job file.
struct JobSpec {
  std::string command;  // trace | length | bounds | search | sphere | report
  std::optional<std::vector<Cplx>> roots;
  std::optional<std::vector<Cplx>> coefficients;
  // sphere inputs
  std::optional<std::vector<Cplx>> numerator;
  std::optional<std::vector<Cplx>> denominator;
  std::optional<CircleOnSphere> circle;
  // search / report inputs
  int degree = 2;
  long budget = 2000;
  std::string family = "zd+1";
  int dmax = 6;
  // common
  std::uint64_t seed = 0;
  std::string format = "json";  // json | csv | svg
  std::string output_path;      // empty = stdout
  int n_lines = 1000;
  int n_samples = 10000;
  ResolvedOptions options = ResolvedOptions::defaults();

  void validate() const;  // throws invalid_argument
};

JobSpec job_from_file(const std::string& path);

/// Executes the job; returns the artifact text (JSON/CSV/SVG).
std::string run_job(const JobSpec& spec);

/// Full entry point: writes the artifact, maps errors to exit codes
/// (0 ok, 2 validation, 3 numerical failure), error JSON on stderr.
int run_cli(int argc, char** argv);

}  // namespace lemni::cli
