#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>

#include "nevac/io.hpp"
#include "nevac/oracle.hpp"
#include "support.hpp"

using namespace nevac;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " NEVAC_BINARY " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> metadata_of(const std::string& path) {
  const auto md = parse_spectral_file(path).metadata;
  return {md.begin(), md.end()};
}

struct Fixture {
  std::filesystem::path dir = nevac::testing::scratch_dir("cli");
  std::string input = (dir / "pole.dat").string();
  std::string quick = " --omega_count 201 --hardy_order 4 ";

  Fixture() {
    std::vector<long> idx{0, 1, 2, 3, 4, 5};
    const auto data = oracle_matsubara(SpectralModel::single_pole(1.0, 0.5), Real(2.0, 256), idx, Statistics::Fermionic);
    write_matsubara(input, data, "2");
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run("") == 1);
  CHECK(run("transmogrify a b") == 1);
  CHECK(run("continue only-input") == 1);
  CHECK(run("continue --config /nonexistent/cfg in out") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("continue writes the configuration into the output") {
  Fixture fx;
  REQUIRE(run("continue" + fx.quick + fx.input + " " + fx.path("rho.dat")) == 0);
  const std::string text = read_file(fx.path("rho.dat"));
  CHECK(text.find("# lambda=1e-4\n") != std::string::npos);
  CHECK(text.find("# omega_count=201\n") != std::string::npos);
  CHECK(text.find("# omega rho\n") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
  Fixture fx;
  REQUIRE(run("continue" + fx.quick + fx.input + " " + fx.path("a.dat")) == 0);
  REQUIRE(run("continue" + fx.quick + fx.input + " " + fx.path("b.dat"), "OMP_NUM_THREADS=3") == 0);
  CHECK(read_file(fx.path("a.dat")) == read_file(fx.path("b.dat")));
}

TEST_CASE("precedence: flag over file over environment") {
  Fixture fx;
  std::ofstream(fx.path("cfg.txt")) << "precision_bits = 224\neta = 0.01\n";
  const std::string out = fx.path("rho.dat");

  REQUIRE(run("continue" + fx.quick + fx.input + " " + out, "NEVAC_PRECISION_BITS=192") == 0);
  CHECK(metadata_of(out).at("precision_bits") == "192");

  REQUIRE(run("continue --config " + fx.path("cfg.txt") + fx.quick + fx.input + " " + out,
              "NEVAC_PRECISION_BITS=192") == 0);
  CHECK(metadata_of(out).at("precision_bits") == "224");
  CHECK(metadata_of(out).at("eta") == "0.01");

  REQUIRE(run("continue --config " + fx.path("cfg.txt") + " --precision_bits 288 --eta 0.02" + fx.quick + fx.input +
                  " " + out,
              "NEVAC_PRECISION_BITS=192") == 0);
  CHECK(metadata_of(out).at("precision_bits") == "288");
  CHECK(metadata_of(out).at("eta") == "0.02");
}

TEST_CASE("exit codes from the command line") {
  Fixture fx;
  std::ofstream(fx.path("corrupt.dat")) << "#! beta=2\n#! statistics=fermionic\n0 1\n";
  std::ofstream(fx.path("acausal.dat")) << "#! beta=2\n#! statistics=fermionic\n0 0 0.5\n1 0 0.4\n2 0 0.3\n3 0 0.2\n";
  std::ofstream(fx.path("bad.cfg")) << "eta = -1\n";
  CHECK(run("continue " + fx.path("corrupt.dat") + " " + fx.path("o.dat")) == 3);
  CHECK(run("continue " + fx.path("acausal.dat") + " " + fx.path("o.dat")) == 2);
  CHECK(run("check " + fx.path("acausal.dat") + " " + fx.path("o.txt")) == 2);
  CHECK(run("continue --config " + fx.path("bad.cfg") + " " + fx.input + " " + fx.path("o.dat")) == 3);
  CHECK(run("continue --eta nope " + fx.input + " " + fx.path("o.dat")) == 3);
  CHECK(run("continue " + fx.input + " " + fx.path("o.dat"), "NEVAC_PRECISION_BITS=lots") == 3);
  CHECK(run("check " + fx.input + " " + fx.path("o.txt")) == 0);
  CHECK(run("fermionize --statistics fermionic " + fx.input + " " + fx.path("f.dat")) == 0);
}
