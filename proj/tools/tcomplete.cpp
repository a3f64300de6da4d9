// tcomplete: mask generation, single completion runs and benchmark grids.
//
// Exit codes: 0 success (including non-convergence warnings), 2 argument
// error, 3 I/O error, 4 numerical failure.

#include <CLI11.hpp>
#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcomplete/tcomplete.hpp"

namespace fs = std::filesystem;
namespace tc = tcomplete;

namespace {

constexpr int kExitArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool has_glob_chars(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

/// Expands quoted glob patterns; literal paths pass through untouched.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& pattern : patterns) {
    if (!has_glob_chars(pattern)) {
      out.emplace_back(pattern);
      continue;
    }
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == GLOB_NOMATCH) {
      globfree(&g);
      throw tc::IoError("no files match " + pattern);
    }
    if (rc != 0) {
      globfree(&g);
      throw tc::IoError("cannot expand " + pattern);
    }
    std::vector<fs::path> matched(g.gl_pathv, g.gl_pathv + g.gl_pathc);
    globfree(&g);
    std::sort(matched.begin(), matched.end());
    out.insert(out.end(), matched.begin(), matched.end());
  }
  return out;
}

tc::Dims parse_dims(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw tc::ParameterError("--dims expects three positive integers N1,N2,N3, got '" + text + "'");
    }
  }
  if (parts.size() != 3) throw tc::ParameterError("--dims expects N1,N2,N3, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

// ---------------------------------------------------------------- mask

struct MaskOptions {
  std::vector<std::string> like;
  std::string dims;
  double sr = 0.0;
  std::uint64_t seed = 42;
  std::string output;
};

int run_mask(const MaskOptions& o) {
  if (o.like.empty() == o.dims.empty()) throw tc::ParameterError("give exactly one of --like or --dims");
  const tc::Dims dims = o.dims.empty() ? tc::load_stack(expand_inputs(o.like)).dims() : parse_dims(o.dims);
  const tc::ObservationMask mask = tc::generate_mask(dims, o.sr, o.seed);
  tc::write_mask(fs::path(o.output), mask);
  std::cout << "dims=" << tc::to_string(dims) << " observed=" << mask.count()
            << " sr=" << tc::format_number(mask.sampling_ratio()) << '\n';
  return 0;
}

// ---------------------------------------------------------------- complete

struct CompleteOptions {
  std::vector<std::string> inputs;
  std::string mask_path;
  std::optional<double> sr;
  std::uint64_t seed = 42;
  std::string method = "tnn-tv2";
  std::optional<double> lambda;
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<double> tol;
  std::size_t max_iter = 500;
  std::string ground_truth;
  std::string outdir = "tcomplete_out";
  std::size_t log_every = 1;
  double stop_exponent = 2.0;
  std::string replay;
};

using Manifest = std::multimap<std::string, std::string>;

Manifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw tc::IoError("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw tc::IoError(path.string() + ": malformed line '" + line + "'");
    m.emplace(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

double manifest_double(const Manifest& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw tc::IoError("manifest lacks " + key);
  try {
    return std::stod(it->second);
  } catch (const std::logic_error&) {
    throw tc::IoError("manifest value for " + key + " is not a number: " + it->second);
  }
}

/// Re-creates the options of a recorded run. The output directory is the one
/// given on the command line, not the recorded one.
CompleteOptions options_from_manifest(const fs::path& path, const std::string& outdir) {
  const Manifest m = read_manifest(path);
  CompleteOptions o;
  for (auto [it, end] = m.equal_range("input"); it != end; ++it) o.inputs.push_back(it->second);
  if (o.inputs.empty()) throw tc::IoError("manifest lists no input");
  const auto source = m.find("mask_source");
  if (source == m.end()) throw tc::IoError("manifest lacks mask_source");
  if (source->second == "file") {
    o.mask_path = m.find("mask_file") != m.end() ? m.find("mask_file")->second : "";
  } else {
    o.sr = manifest_double(m, "mask_sr");
    o.seed = static_cast<std::uint64_t>(std::stoull(m.find("mask_seed")->second));
  }
  o.method = m.find("method") != m.end() ? m.find("method")->second : o.method;
  o.lambda = manifest_double(m, "lambda");
  o.beta1 = manifest_double(m, "beta1");
  o.beta2 = manifest_double(m, "beta2");
  o.tol = manifest_double(m, "tol");
  o.max_iter = static_cast<std::size_t>(manifest_double(m, "max_iter"));
  o.log_every = static_cast<std::size_t>(manifest_double(m, "log_every"));
  o.stop_exponent = manifest_double(m, "stop_exponent");
  if (const auto gt = m.find("ground_truth"); gt != m.end()) o.ground_truth = gt->second;
  o.outdir = outdir;
  return o;
}

/// Output image format follows the first input; tensor-file inputs only get
/// the exact .tns3 copy.
std::optional<std::string> image_extension(const fs::path& first_input) {
  std::string ext = first_input.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png" || ext == ".ppm" || ext == ".pgm") return ext;
  return std::nullopt;
}

int run_complete(CompleteOptions o, bool lambda_given, bool beta2_given) {
  const auto started = utc_timestamp();
  const std::vector<fs::path> inputs = expand_inputs(o.inputs);
  if (inputs.empty()) throw tc::ParameterError("no input files");
  if (o.mask_path.empty() == !o.sr.has_value()) throw tc::ParameterError("give exactly one of --mask or --sr");

  const tc::Method method = tc::parse_method(o.method);
  tc::SolverConfig config = tc::SolverConfig::defaults(method);
  if (o.lambda) config.lambda = *o.lambda;
  if (o.beta1) config.beta1 = *o.beta1;
  if (o.beta2) config.beta2 = *o.beta2;
  if (o.tol) config.tol = *o.tol;
  config.max_iter = o.max_iter;
  config.log_every = o.log_every;
  config.rel_change_power = o.stop_exponent;
  if (!tc::uses_tv(method)) {
    if (lambda_given) std::cerr << "warning: --lambda is ignored for method tnn\n";
    if (beta2_given) std::cerr << "warning: --beta2 is ignored for method tnn\n";
  }
  config.validate();

  const tc::Tensor3 input = tc::load_stack(inputs);
  tc::ObservationMask mask;
  if (!o.mask_path.empty()) {
    mask = tc::read_mask(fs::path(o.mask_path));
    if (mask.dims() != input.dims()) {
      throw tc::DimensionError("mask dims " + tc::to_string(mask.dims()) + " do not match input dims " +
                               tc::to_string(input.dims()));
    }
  } else {
    mask = tc::generate_mask(input.dims(), *o.sr, o.seed);
  }

  // With a generated mask the input is the fully known image, so it doubles
  // as the reference for metrics.
  std::optional<tc::Tensor3> truth;
  if (!o.ground_truth.empty()) {
    truth = tc::load_stack(expand_inputs({o.ground_truth}));
  } else if (o.mask_path.empty()) {
    truth = input;
  }
  if (truth && truth->dims() != input.dims()) {
    throw tc::DimensionError("ground truth dims " + tc::to_string(truth->dims()) + " do not match input dims " +
                             tc::to_string(input.dims()));
  }

  const fs::path outdir(o.outdir);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw tc::IoError("cannot create " + outdir.string() + ": " + ec.message());

  const tc::Tensor3 observed = tc::restrict_to_mask(input, mask);
  const auto t0 = std::chrono::steady_clock::now();
  const tc::SolveResult result = tc::solve(config, observed, mask, truth ? &*truth : nullptr);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<fs::path> written = tc::save_stack(result.recovered, outdir / "recovered.tns3");
  if (const auto ext = image_extension(inputs.front())) {
    const auto images = tc::save_stack(result.recovered, outdir / ("recovered" + *ext));
    written.insert(written.end(), images.begin(), images.end());
  }
  {
    std::ofstream log(outdir / "log.csv", std::ios::binary);
    tc::write_iteration_log(log, result.history, config.log_every);
    if (!log) throw tc::IoError("failed writing " + (outdir / "log.csv").string());
  }
  tc::write_mask(outdir / "mask.msk3", mask);

  std::optional<tc::MetricReport> report;
  if (truth) report = tc::metrics(result.recovered, *truth);

  std::ofstream manifest(outdir / "manifest.txt", std::ios::binary);
  manifest << "# tcomplete run manifest; replay with: tcomplete complete --replay <this file> -o <dir>\n";
  for (const auto& p : inputs) manifest << "input=" << p.string() << '\n';
  if (o.mask_path.empty()) {
    manifest << "mask_source=generated\nmask_sr=" << tc::format_number(*o.sr) << "\nmask_seed=" << o.seed << '\n';
  } else {
    manifest << "mask_source=file\nmask_file=" << o.mask_path << '\n';
  }
  manifest << "method=" << tc::to_string(method) << '\n'
           << "lambda=" << tc::format_number(config.lambda) << '\n'
           << "beta1=" << tc::format_number(config.beta1) << '\n'
           << "beta2=" << tc::format_number(config.beta2) << '\n'
           << "tol=" << tc::format_number(config.tol) << '\n'
           << "max_iter=" << config.max_iter << '\n'
           << "log_every=" << config.log_every << '\n'
           << "stop_exponent=" << tc::format_number(config.rel_change_power) << '\n';
  if (!o.ground_truth.empty()) manifest << "ground_truth=" << o.ground_truth << '\n';
  manifest << "outdir=" << outdir.string() << '\n'
           << "dims=" << tc::to_string(input.dims()) << '\n'
           << "observed=" << mask.count() << '\n'
           << "iterations=" << result.history.size() << '\n'
           << "converged=" << (result.converged ? "true" : "false") << '\n';
  if (report) {
    manifest << "rse_paper=" << tc::format_number(report->rse_paper) << '\n'
             << "rse_standard=" << tc::format_number(report->rse_standard) << '\n'
             << "psnr=" << tc::format_number(report->psnr) << '\n';
  }
  for (const auto& p : written) manifest << "output=" << p.string() << '\n';
  manifest << "seconds=" << tc::format_number(seconds) << '\n'
           << "started_at=" << started << '\n'
           << "finished_at=" << utc_timestamp() << '\n';
  if (!manifest) throw tc::IoError("failed writing manifest");

  if (!result.converged) {
    std::cerr << "warning: no convergence within " << config.max_iter << " iterations; writing the last iterate\n";
  }
  if (report) {
    std::cout << "rse=" << tc::format_number(report->rse_paper)
              << " rse_standard=" << tc::format_number(report->rse_standard)
              << " psnr=" << tc::format_number(report->psnr);
  } else {
    std::cout << "rse=n/a psnr=n/a";
  }
  char secs[32];
  std::snprintf(secs, sizeof(secs), "%.3f", seconds);
  std::cout << " iterations=" << result.history.size() << " seconds=" << secs << " outdir=" << outdir.string()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string images;
  std::vector<double> srs{0.1, 0.2};
  std::vector<std::string> methods{"tnn", "tnn-tv1", "tnn-tv2"};
  std::uint64_t seed = 42;
  std::size_t max_iter = 500;
  std::string output;
  std::string format;
};

struct BenchRow {
  std::string image;
  double sr;
  std::string method;
  double rse;
  double psnr;
  double seconds;
  std::size_t iters;
};

std::vector<fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw tc::IoError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && image_extension(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_table(std::ostream& os, const std::vector<BenchRow>& rows, bool markdown) {
  auto secs = [](double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", s);
    return std::string(buf);
  };
  if (markdown) {
    os << "| image | sr | method | rse | psnr | seconds | iters |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      os << "| " << r.image << " | " << tc::format_number(r.sr) << " | " << r.method << " | "
         << tc::format_number(r.rse) << " | " << tc::format_number(r.psnr) << " | " << secs(r.seconds) << " | "
         << r.iters << " |\n";
    }
    return;
  }
  os << "image,sr,method,rse,psnr,seconds,iters\n";
  for (const auto& r : rows) {
    os << r.image << ',' << tc::format_number(r.sr) << ',' << r.method << ',' << tc::format_number(r.rse) << ','
       << tc::format_number(r.psnr) << ',' << secs(r.seconds) << ',' << r.iters << '\n';
  }
}

int run_bench(const BenchOptions& o) {
  std::vector<tc::Method> methods;
  for (const auto& name : o.methods) methods.push_back(tc::parse_method(name));
  for (double sr : o.srs) {
    if (!(sr > 0.0 && sr <= 1.0)) throw tc::ParameterError("sampling ratio must lie in (0, 1], got " + tc::format_number(sr));
  }
  const std::vector<fs::path> images = list_images(o.images);
  if (images.empty()) throw tc::ParameterError("no .png/.ppm/.pgm images in " + o.images);

  bool markdown = o.format == "markdown";
  if (o.format.empty()) markdown = fs::path(o.output).extension() == ".md";
  else if (o.format != "csv" && o.format != "markdown") throw tc::ParameterError("--format must be csv or markdown");

  std::vector<BenchRow> rows;
  for (const auto& path : images) {
    const tc::Tensor3 truth = tc::load_stack(path);
    for (double sr : o.srs) {
      const tc::ObservationMask mask = tc::generate_mask(truth.dims(), sr, o.seed);
      const tc::Tensor3 observed = tc::restrict_to_mask(truth, mask);
      for (tc::Method method : methods) {
        tc::SolverConfig config = tc::SolverConfig::defaults(method);
        config.max_iter = o.max_iter;
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = tc::solve(config, observed, mask);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto report = tc::metrics(result.recovered, truth);
        rows.push_back({path.filename().string(), sr, std::string(tc::to_string(method)), report.rse_paper,
                        report.psnr, seconds, result.history.size()});
        std::cerr << path.filename().string() << " sr=" << tc::format_number(sr) << ' ' << tc::to_string(method)
                  << " psnr=" << tc::format_number(report.psnr) << " iters=" << result.history.size() << '\n';
      }
    }
  }
  if (o.output.empty()) {
    write_table(std::cout, rows, markdown);
  } else {
    std::ofstream os(o.output, std::ios::binary);
    if (!os) throw tc::IoError("cannot write " + o.output);
    write_table(os, rows, markdown);
    if (!os) throw tc::IoError("failed writing " + o.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-tubal-rank tensor completion with total-variation regularization"};
  app.require_subcommand(1);

  MaskOptions mask_opts;
  auto* mask_cmd = app.add_subcommand("mask", "Generate a seeded observation mask (MSK3)");
  mask_cmd->add_option("--like", mask_opts.like, "Image(s) or .tns3 whose dims the mask takes");
  mask_cmd->add_option("--dims", mask_opts.dims, "Explicit dims N1,N2,N3");
  mask_cmd->add_option("--sr", mask_opts.sr, "Sampling ratio in (0, 1]")->required();
  mask_cmd->add_option("--seed", mask_opts.seed, "PRNG seed")->capture_default_str();
  mask_cmd->add_option("-o,--output", mask_opts.output, "Output .msk3 path")->required();

  CompleteOptions complete_opts;
  auto* complete_cmd = app.add_subcommand("complete", "Complete an image, frame stack or tensor");
  complete_cmd->add_option("-i,--input", complete_opts.inputs, "Input image(s), frame glob or .tns3");
  complete_cmd->add_option("--mask", complete_opts.mask_path, "Observation mask (.msk3)");
  complete_cmd->add_option("--sr", complete_opts.sr, "Generate a mask with this sampling ratio");
  complete_cmd->add_option("--seed", complete_opts.seed, "Seed for the generated mask")->capture_default_str();
  complete_cmd->add_option("--method", complete_opts.method, "tnn-tv1, tnn-tv2 or tnn")->capture_default_str();
  auto* lambda_opt = complete_cmd->add_option("--lambda", complete_opts.lambda, "TV weight (default 0.1 for tnn-tv1, 1 for tnn-tv2)");
  complete_cmd->add_option("--beta1", complete_opts.beta1, "Penalty on A = Z (default 0.01)");
  auto* beta2_opt = complete_cmd->add_option("--beta2", complete_opts.beta2, "Penalty on DA = W (default 1e-4)");
  complete_cmd->add_option("--tol", complete_opts.tol, "Stopping tolerance on the relative change (default 1e-4)");
  complete_cmd->add_option("--max-iter", complete_opts.max_iter, "Iteration cap")->capture_default_str();
  complete_cmd->add_option("--ground-truth", complete_opts.ground_truth, "Reference for RSE/PSNR");
  complete_cmd->add_option("-o,--outdir", complete_opts.outdir, "Output directory")->capture_default_str();
  complete_cmd->add_option("--log-every", complete_opts.log_every, "CSV log stride")->capture_default_str();
  complete_cmd->add_option("--stop-exponent", complete_opts.stop_exponent,
                           "Exponent p in (||dA|| / ||A||)^p <= tol")
      ->capture_default_str();
  complete_cmd->add_option("--replay", complete_opts.replay, "Re-run the configuration recorded in a manifest");

  BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench", "Run every method at every sampling ratio on a directory of images");
  bench_cmd->add_option("--images", bench_opts.images, "Directory of .png/.ppm/.pgm images")->required();
  bench_cmd->add_option("--sr", bench_opts.srs, "Sampling ratios")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--methods", bench_opts.methods, "Methods")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--seed", bench_opts.seed, "Mask seed")->capture_default_str();
  bench_cmd->add_option("--max-iter", bench_opts.max_iter, "Iteration cap")->capture_default_str();
  bench_cmd->add_option("-o,--output", bench_opts.output, "Table path (.csv or .md); stdout if absent");
  bench_cmd->add_option("--format", bench_opts.format, "csv or markdown (default from the output extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (mask_cmd->parsed()) return run_mask(mask_opts);
    if (complete_cmd->parsed()) {
      if (!complete_opts.replay.empty()) {
        const bool outdir_given = complete_cmd->count("--outdir") > 0;
        auto replayed = options_from_manifest(complete_opts.replay, complete_opts.outdir);
        if (!outdir_given) throw tc::ParameterError("--replay needs -o/--outdir for the new run");
        return run_complete(std::move(replayed), false, false);
      }
      if (complete_opts.inputs.empty()) throw tc::ParameterError("complete needs -i/--input");
      return run_complete(complete_opts, lambda_opt->count() > 0, beta2_opt->count() > 0);
    }
    if (bench_cmd->parsed()) return run_bench(bench_opts);
  } catch (const tc::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  } catch (const tc::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  } catch (const tc::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const tc::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitArgs;
}
