// Spawns the command-line driver (path given as the last argument) and checks
// exit codes, output schemas, and run-to-run determinism.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;  // driver binary, set in main()

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args, bool merge_stderr = false) {
    RunResult r;
    const std::string cmd = g_cli + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f != nullptr);
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0)
        r.out.append(buf, n);
    const int status = pclose(f);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

// Comma split honoring double-quoted fields (signatures contain commas).
std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string write_temp(const std::string& stem, const std::string& text) {
    const std::string path =
        (std::filesystem::temp_directory_path() / (stem + "." + std::to_string(getpid()) + ".metric")).string();
    std::ofstream out(path);
    out << text;
    out.close();
    return path;
}

const char* kWarpedMetric = R"mf(
[chart]
coords = "x,y,z"
domain = "(-2,2)x(-2,2)x(-1.8,1.8)"
[metric]
g11 = "cosh(z)^2"
g12 = "0"
g13 = "0"
g22 = "cosh(z)^2"
g23 = "0"
g33 = "1"
[frame]
k = "0,0,1"
x = "1/cosh(z), 0, 0"
y = "0, 1/cosh(z), 0"
)mf";

const char* kNoFrameMetric = R"mf(
[chart]
coords = "x,y,z"
domain = "(-1,1)x(-1,1)x(-1,1)"
[metric]
g11 = "1"
g12 = "0"
g13 = "0"
g22 = "1"
g23 = "0"
g33 = "1"
)mf";

}  // namespace

TEST_CASE("usage errors exit with status 2") {
    CHECK(run("").exit_code == 2);                                        // missing subcommand
    CHECK(run("report").exit_code == 2);                                  // neither --catalog nor --metric
    CHECK(run("report --catalog flat --metric x.metric").exit_code == 2); // both
    CHECK(run("report --catalog no-such-metric").exit_code == 2);
    CHECK(run("report --catalog flat --point 1,2").exit_code == 2);
    CHECK(run("report --catalog flat --point 1,2,3,4").exit_code == 2);
    CHECK(run("report --catalog flat --param r").exit_code == 2);
    CHECK(run("report --catalog flat --param r=abc").exit_code == 2);
    CHECK(run("report --catalog flat --format yaml").exit_code == 2);
    CHECK(run("report --catalog flat --samples 0").exit_code == 2);
    CHECK(run("report --catalog flat --field hopf").exit_code == 2);      // flat has no named frames
    CHECK(run("verify --catalog flat --scenario thm9").exit_code == 2);
    CHECK(run("flow --catalog flat").exit_code == 2);                     // no --point, no --ode
    CHECK(run("flow --ode no-such-problem").exit_code == 2);
    CHECK(run("catalog").exit_code == 2);
    CHECK(run("catalog show").exit_code == 2);
    CHECK(run("catalog show no-such-metric").exit_code == 2);
    CHECK(run("verify --metric /nonexistent/path.metric").exit_code == 2);

    const RunResult bad = run("report --catalog no-such-metric", true);
    CHECK(bad.out.find("unknown catalog metric") != std::string::npos);
}

TEST_CASE("runtime evaluation errors exit with status 3") {
    CHECK(run("report --catalog flat --point 9,0,0").exit_code == 3);     // outside the chart
    const RunResult r = run("report --catalog flat --point 9,0,0", true);
    CHECK(r.out.find("error:") != std::string::npos);

    // step monitor trip: absurd step size on a curved flow
    CHECK(run("flow --catalog nil --point 0,0,0 --dt 2.0 --smax 4").exit_code == 3);
}

TEST_CASE("--help succeeds and names the subcommands") {
    const RunResult r = run("--help", true);
    CHECK(r.exit_code == 0);
    for (const char* sub : {"report", "verify", "classify", "flow", "catalog"})
        CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("verify exit codes reflect the residual gate") {
    CHECK(run("verify --catalog round-sphere --samples 5 --seed 7").exit_code == 0);
    CHECK(run("verify --catalog flat --samples 5").exit_code == 0);
    // machine-precision residuals cannot beat an impossible tolerance
    CHECK(run("verify --catalog nil --samples 5 --tol 1e-15").exit_code == 1);

    const RunResult fail = run("verify --catalog nil --samples 5 --tol 1e-15");
    CHECK(fail.out.find("FAIL") != std::string::npos);
    const RunResult ok = run("verify --catalog flat --samples 5");
    CHECK(ok.out.find("all identities within tolerance") != std::string::npos);
}

TEST_CASE("verify csv lists the seven identity residuals") {
    const RunResult r = run("verify --catalog round-sphere --samples 5 --seed 3 --format csv");
    CHECK(r.exit_code == 0);
    const std::vector<std::string> ls = lines_of(r.out);
    REQUIRE(ls.size() == 8);
    CHECK(ls[0] == "label,max_residual,max_scale,max_relative");
    const char* labels[7] = {"S1", "S2", "S3", "S4", "S5", "bid1", "bid2"};
    for (int k = 0; k < 7; ++k) {
        const std::vector<std::string> f = csv_fields(ls[size_t(k) + 1]);
        REQUIRE(f.size() == 4);
        CHECK(f[0] == labels[k]);
        CHECK(std::stod(f[3]) < 1e-6);
    }
}

TEST_CASE("report csv schema with and without a frame") {
    const RunResult framed = run("report --catalog round-sphere --samples 3 --seed 1 --format csv");
    CHECK(framed.exit_code == 0);
    const std::vector<std::string> ls = lines_of(framed.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] ==
          "x,y,z,S,lam1,lam2,lam3,signature,div_k,omega,kappa_re,kappa_im,rho_re,rho_im,"
          "sigma_re,sigma_im,eps_re,eps_im,beta_re,beta_im,abs_sigma2,det_d,H");
    for (size_t i = 1; i < ls.size(); ++i) {
        const std::vector<std::string> f = csv_fields(ls[i]);
        REQUIRE(f.size() == 23);
        CHECK(std::stod(f[3]) == Catch::Approx(6.0).margin(1e-7));  // S on the unit sphere
        CHECK(f[7] == "(+,+,+)");
    }

    const std::string path = write_temp("ricci3_noframe", kNoFrameMetric);
    const RunResult bare = run("report --metric " + path + " --samples 2 --format csv");
    CHECK(bare.exit_code == 0);
    const std::vector<std::string> bls = lines_of(bare.out);
    REQUIRE(bls.size() == 3);
    CHECK(bls[0] == "x,y,z,S,lam1,lam2,lam3,signature");
    CHECK(csv_fields(bls[1]).size() == 8);
    std::remove(path.c_str());
}

TEST_CASE("report with the fiber frame reproduces the constant twist") {
    const RunResult r =
        run("report --catalog round-sphere --field hopf --point 0.2,-0.1,0.3 --format csv");
    CHECK(r.exit_code == 0);
    const std::vector<std::string> ls = lines_of(r.out);
    REQUIRE(ls.size() == 2);
    const std::vector<std::string> f = csv_fields(ls[1]);
    REQUIRE(f.size() == 23);
    CHECK(std::stod(f[8]) == Catch::Approx(0.0).margin(1e-9));    // div k
    CHECK(std::stod(f[9]) == Catch::Approx(2.0).margin(1e-6));    // omega
    CHECK(std::stod(f[20]) == Catch::Approx(0.0).margin(1e-10));  // |sigma|^2
    CHECK(std::stod(f[21]) == Catch::Approx(1.0).margin(1e-6));   // det D
    // report pins mu to -lam1, here -2, so H = det D - mu/2 = 2
    CHECK(std::stod(f[22]) == Catch::Approx(2.0).margin(1e-6));   // H
}

TEST_CASE("classify reports one uniform signature on homogeneous metrics") {
    const RunResult r = run("classify --catalog nil --samples 12 --seed 5 --format csv");
    CHECK(r.exit_code == 0);
    const std::vector<std::string> ls = lines_of(r.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "signature,count,lam1,lam2,lam3");
    const std::vector<std::string> f = csv_fields(ls[1]);
    REQUIRE(f.size() == 5);
    CHECK(f[0] == "(-,-,+)");
    CHECK(f[1] == "12");

    const RunResult text = run("classify --catalog nil --samples 12 --seed 5");
    CHECK(text.out.find("uniform signature") != std::string::npos);
}

TEST_CASE("flow csv carries the transport scalars and their law residuals") {
    const RunResult r = run("flow --catalog s2xr --point 1.2,0.4,0 --smax 0.05 --format csv");
    CHECK(r.exit_code == 0);
    const std::vector<std::string> ls = lines_of(r.out);
    REQUIRE(ls.size() == 52);  // header + 51 samples
    CHECK(ls[0] == "s,theta,omega,sigma_abs2,rho_abs2,H,S,res_theta,res_omega,res_sigma_abs2,res_rho_abs2,res_H");

    const std::vector<std::string> first = csv_fields(ls[1]);
    REQUIRE(first.size() == 12);
    CHECK(std::stod(first[0]) == 0.0);
    CHECK(first[7] == "nan");  // stencil does not reach the ends

    const std::vector<std::string> mid = csv_fields(ls[26]);
    CHECK(std::stod(mid[6]) == Catch::Approx(2.0).margin(1e-9));  // S of the unit-sphere product
    CHECK(std::abs(std::stod(mid[7])) < 1e-6);
    CHECK(std::abs(std::stod(mid[11])) < 1e-6);
}

TEST_CASE("flow text output reports boundary truncation") {
    const RunResult r = run("flow --catalog sol --point 0,0,1.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("stopped at boundary yes") != std::string::npos);

    const RunResult inside = run("flow --catalog nil --point 0,0,0 --smax 0.5");
    CHECK(inside.exit_code == 0);
    CHECK(inside.out.find("stopped at boundary no") != std::string::npos);
    CHECK(inside.out.find("mu") != std::string::npos);
}

TEST_CASE("flow --ode integrates a comparison problem against its closed form") {
    const RunResult r = run("flow --ode ray3 --format csv");
    CHECK(r.exit_code == 0);
    const std::vector<std::string> ls = lines_of(r.out);
    REQUIRE(ls.size() == 5002);  // header + [0,5] at dt=1e-3
    CHECK(ls[0] == "s,numeric,closed_form,abs_err");
    double worst = 0.0;
    for (size_t i = 1; i < ls.size(); ++i)
        worst = std::max(worst, std::stod(csv_fields(ls[i])[3]));
    CHECK(worst < 1e-8);

    const RunResult text = run("flow --ode h-concave");
    CHECK(text.exit_code == 0);
    CHECK(text.out.find("substitution residual") != std::string::npos);
}

TEST_CASE("catalog list names every built-in metric") {
    const RunResult r = run("catalog list");
    CHECK(r.exit_code == 0);
    for (const char* name : {"flat", "round-sphere", "hyperbolic", "nil", "sol",
                             "euclidean-e2-group", "su2-berger", "s2xr"})
        CHECK(r.out.find(name) != std::string::npos);

    const RunResult jl = run("catalog list --format json-lines");
    CHECK(jl.exit_code == 0);
    const std::vector<std::string> ls = lines_of(jl.out);
    CHECK(ls.size() == 8);
    for (const std::string& l : ls)
        CHECK(l.rfind("{\"name\":\"", 0) == 0);
}

TEST_CASE("catalog show emits a spec file the driver accepts back") {
    const RunResult shown = run("catalog show round-sphere --param r=2");
    CHECK(shown.exit_code == 0);
    CHECK(shown.out.find("[metric]") != std::string::npos);
    const std::string path = write_temp("ricci3_roundtrip", shown.out);

    CHECK(run("verify --metric " + path + " --samples 5 --seed 2").exit_code == 0);

    // radius-2 sphere: S = 6/r^2
    const RunResult rep = run("report --metric " + path + " --point 0.3,0.1,-0.2 --format csv");
    CHECK(rep.exit_code == 0);
    const std::vector<std::string> ls = lines_of(rep.out);
    REQUIRE(ls.size() == 2);
    CHECK(std::stod(csv_fields(ls[1])[3]) == Catch::Approx(1.5).margin(1e-9));
    std::remove(path.c_str());
}

TEST_CASE("scenario verification gates on hypotheses") {
    const std::string path = write_temp("ricci3_warped", kWarpedMetric);
    const RunResult ok = run("verify --metric " + path + " --scenario thm1 --samples 8 --seed 4");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("APPLICABLE") != std::string::npos);
    CHECK(ok.out.find("hypothesis  pass") != std::string::npos);
    CHECK(ok.out.find("check       pass") != std::string::npos);
    std::remove(path.c_str());

    const RunResult na = run("verify --catalog round-sphere --scenario thm3 --samples 8");
    CHECK(na.exit_code == 0);
    CHECK(na.out.find("NOT-APPLICABLE") != std::string::npos);
    CHECK(na.out.find("FAIL") != std::string::npos);  // the failed hypothesis is shown

    const RunResult applies = run("verify --catalog s2xr --scenario thm3 --samples 8 --seed 9");
    CHECK(applies.exit_code == 0);
    CHECK(applies.out.find(": APPLICABLE") != std::string::npos);

    const RunResult csv = run("verify --catalog s2xr --scenario thm3 --samples 8 --seed 9 --format csv");
    CHECK(csv.exit_code == 0);
    const std::vector<std::string> ls = lines_of(csv.out);
    REQUIRE(ls.size() > 5);
    CHECK(ls[0] == "kind,label,status,value,scale");
    CHECK(csv.out.find("hypothesis,") != std::string::npos);
    CHECK(csv.out.find("check,") != std::string::npos);
    CHECK(csv.out.find(",fail") == std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical output") {
    const std::string report_cmd = "report --catalog su2-berger --samples 25 --seed 11 --format csv";
    CHECK(run(report_cmd).out == run(report_cmd).out);

    const std::string flow_cmd = "flow --catalog nil --point 0.1,0.2,0.3 --smax 0.2 --format csv";
    CHECK(run(flow_cmd).out == run(flow_cmd).out);

    const std::string classify_cmd = "classify --catalog hyperbolic --samples 30 --seed 2 --format json-lines";
    CHECK(run(classify_cmd).out == run(classify_cmd).out);

    // a different seed must actually change the sample
    CHECK(run("report --catalog su2-berger --samples 25 --seed 12 --format csv").out != run(report_cmd).out);
}

TEST_CASE("worker count does not change the output") {
    const std::string cmd = "verify --catalog nil --samples 6 --seed 8 --format csv";
    const std::string base = run(cmd).out;
    const RunResult threaded = [&] {
        RunResult r;
        const std::string full = "RICCI3_THREADS=4 " + g_cli + " " + cmd + " 2>/dev/null";
        FILE* f = popen(full.c_str(), "r");
        REQUIRE(f != nullptr);
        char buf[4096];
        size_t n = 0;
        while ((n = fread(buf, 1, sizeof buf, f)) > 0)
            r.out.append(buf, n);
        r.exit_code = WEXITSTATUS(pclose(f));
        return r;
    }();
    CHECK(threaded.exit_code == 0);
    CHECK(threaded.out == base);
}

int main(int argc, char* argv[]) {
    std::vector<char*> args(argv, argv + argc);
    if (args.size() > 1) {
        const std::string last = args.back();
        if (!last.empty() && last[0] != '-' && std::filesystem::exists(last)) {
            g_cli = last;
            args.pop_back();
        }
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: test_cli [catch2 options] <path-to-driver-binary>\n");
        return 2;
    }
    Catch::Session session;
    const int rc = session.applyCommandLine(static_cast<int>(args.size()), args.data());
    if (rc != 0)
        return rc;
    return session.run();
}
