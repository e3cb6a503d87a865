// curvlab <command> [--config FILE] [--k0 R --h0 R --a X,Y] [--p X,Y]
//                   [--lambdas L1,L2,...] [--out DIR]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "curvlab/cli.hpp"

namespace {

std::optional<curvlab::Point> as_point(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return curvlab::Point(v[0], v[1]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Gaussian and geodesic curvature on the unit disk: bubbles, blow-up "
               "candidates, Newton solves, synthetic blow-up sequences and identity checks."};
  app.set_version_flag("--version", "curvlab 1.0");

  std::string command, config;
  curvlab::CliFlags flags;
  double k0 = 0.0, h0 = 0.0;
  std::vector<double> a, p, lambdas;
  std::string out;

  app.add_option("command", command, "bubble | candidates | solve | sequence | identities | validate")
      ->required()
      ->check(CLI::IsMember(curvlab::commands()));
  app.add_option("--config", config, "JSON problem file")->check(CLI::ExistingFile);
  auto* ok0 = app.add_option("--k0", k0, "constant Gaussian curvature of the bubble / initial guess");
  auto* oh0 = app.add_option("--h0", h0, "constant geodesic curvature of the bubble / initial guess");
  auto* oa = app.add_option("--a", a, "bubble centre X,Y")->delimiter(',')->expected(2)->allow_extra_args(false);
  auto* op = app.add_option("--p", p, "boundary point X,Y of the blow-up sequence")
                 ->delimiter(',')
                 ->expected(2)
                 ->allow_extra_args(false);
  auto* ol = app.add_option("--lambdas", lambdas, "increasing sequence parameters L1,L2,...")
                 ->delimiter(',')
                 ->expected(1, 64)
                 ->allow_extra_args(false);
  auto* oo = app.add_option("--out", out, "output directory for reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (ok0->count()) flags.k0 = k0;
  if (oh0->count()) flags.h0 = h0;
  if (oa->count()) flags.a = as_point(a);
  if (op->count()) flags.p = as_point(p);
  if (ol->count()) flags.lambdas = lambdas;
  if (oo->count()) flags.out = out;
  return curvlab::run(command, config, flags);
}
