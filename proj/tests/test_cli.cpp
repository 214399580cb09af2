#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = BIEXSIM_TEST_DIR;

struct Run {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config(const std::string& name, const std::string& text, const std::string& output = "") {
    fs::create_directories(kWork);
    const fs::path path = kWork / (name + ".ini");
    std::ofstream(path) << text << "[output]\ndirectory = " << (kWork / name).string() << '\n' << output;
    return path;
}

Run run(const std::string& args) {
    const fs::path out = kWork / "stdout.txt";
    const fs::path err = kWork / "stderr.txt";
    const std::string command = std::string(BIEXSIM_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(command.c_str());
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

std::string last_line(const std::string& text) {
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    return last;
}

// "P_0=.. P_X=.. P_XX=.." -> values by name
std::map<std::string, double> occupations(const std::string& line) {
    std::map<std::string, double> out;
    std::istringstream in(line);
    std::string field;
    while (in >> field) {
        const auto eq = field.find('=');
        if (eq != std::string::npos) out[field.substr(0, eq)] = std::stod(field.substr(eq + 1));
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        FAIL("missing column " << name);
        return 0;
    }
};

Table read_table(const fs::path& path) {
    Table t;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.header.push_back(line);
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream s(line);
        std::string f;
        while (std::getline(s, f, ',')) fields.push_back(f);
        if (t.columns.empty()) {
            t.columns = fields;
            continue;
        }
        std::vector<double> row;
        for (const std::string& v : fields) {
            try {
                row.push_back(std::stod(v));
            } catch (const std::exception&) {
                row.push_back(0.0);  // solver names
            }
        }
        t.rows.push_back(row);
    }
    return t;
}

}  // namespace

TEST_CASE("zero area leaves the ground state") {
    const fs::path cfg = write_config("zero", "[pulse]\narea = 0\n");
    const Run r = run("simulate --config " + cfg.string());
    CHECK(r.exit_code == 0);
    const auto o = occupations(last_line(r.out));
    CHECK(last_line(r.out).rfind("P_0=", 0) == 0);
    CHECK(o.at("P_0") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(o.at("P_XX") == doctest::Approx(0.0));
    const Table t = read_table(kWork / "zero" / "simulate.csv");
    CHECK(t.columns.size() == 10);
    CHECK(t.rows.size() > 10);
}

TEST_CASE("invalid configurations exit with 1 and name the key") {
    const fs::path cfg = write_config("bad", "[pulse]\nfwhm = -3\n");
    Run r = run("simulate --config " + cfg.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("pulse.fwhm") != std::string::npos);

    const fs::path unknown = write_config("unknown", "[grid]\nsteps = 3\n");
    r = run("sweep --config " + unknown.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("grid.steps") != std::string::npos);

    CHECK(run("simulate").exit_code == 1);
    CHECK(run("simulate --config " + (kWork / "missing.ini").string()).exit_code == 1);
    CHECK(run("teleport --config " + cfg.string()).exit_code == 1);
    const fs::path good = write_config("good", "");
    CHECK(run("simulate --config " + good.string() + " --solver euler").exit_code == 1);
    CHECK(run("sweep --config " + good.string() + " --workers 0").exit_code == 1);
}

TEST_CASE("solver failures exit with 2") {
    const fs::path cfg = write_config("budget", "[pulse]\narea = 1\n[grid]\nmemory = 8\nmemory_budget_mb = 1\n");
    Run r = run("simulate --config " + cfg.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("budget") != std::string::npos);

    r = run("sweep --config " + cfg.string());
    CHECK(r.exit_code == 2);
    const Table t = read_table(kWork / "budget" / "sweep.csv");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][t.column("converged")] == 0.0);
}

TEST_CASE("without phonons the path integral matches the unitary solver") {
    const fs::path cfg = write_config("nophonon", "[pulse]\narea = 1\n[bath]\nalpha = 0\n");
    const Run path = run("simulate --config " + cfg.string() + " --solver pathint");
    const Run exact = run("simulate --config " + cfg.string() + " --solver unitary");
    REQUIRE(path.exit_code == 0);
    REQUIRE(exact.exit_code == 0);
    const double a = occupations(last_line(path.out)).at("P_XX");
    const double b = occupations(last_line(exact.out)).at("P_XX");
    CHECK(std::abs(a - b) < 1e-3);
    CHECK(b > 0.99);
}

TEST_CASE("detuned three-unit pulse reaches the plateau") {
    const fs::path cfg = write_config("plateau", "[pulse]\narea = 3\ndetuning = 0.65\n");
    const Run r = run("simulate --config " + cfg.string());
    REQUIRE(r.exit_code == 0);
    CHECK(occupations(last_line(r.out)).at("P_XX") >= 0.95);
    CHECK(r.out.find("max_trace_drift") != std::string::npos);
}

TEST_CASE("one-point sweep matches simulate and reruns are byte identical") {
    const std::string body = "[pulse]\narea = 2\ndetuning = 0.4\n[grid]\ndt = 0.8\nmemory = 4\n";
    const fs::path single = write_config("single", body);
    const Run sim = run("simulate --config " + single.string());
    const Run sweep = run("sweep --config " + single.string());
    REQUIRE(sim.exit_code == 0);
    REQUIRE(sweep.exit_code == 0);
    const Table t = read_table(kWork / "single" / "sweep.csv");
    REQUIRE(t.rows.size() == 1);
    const auto o = occupations(last_line(sim.out));
    CHECK(t.rows[0][t.column("p_xx")] == o.at("P_XX"));
    CHECK(t.rows[0][t.column("p_g")] == o.at("P_0"));
    CHECK(fs::exists(kWork / "single" / "sweep.gp"));
    CHECK(fs::exists(kWork / "single" / "max_fidelity.csv"));

    const fs::path grid = write_config(
        "rerun", "[grid]\ndt = 0.8\nmemory = 3\n[sweep]\nareas = 0.5, 1, 1.5\ndetunings = 0, 0.65\nworkers = 1\n");
    REQUIRE(run("sweep --config " + grid.string()).exit_code == 0);
    const std::string first = slurp(kWork / "rerun" / "sweep.csv");
    REQUIRE(run("sweep --config " + grid.string() + " --workers 3 --seedless").exit_code == 0);
    CHECK(slurp(kWork / "rerun" / "sweep.csv") == first);
    REQUIRE(run("sweep --config " + grid.string() + " --out " + (kWork / "rerun2").string()).exit_code == 0);
    CHECK(slurp(kWork / "rerun2" / "sweep.csv") == first);
}

TEST_CASE("dressed table") {
    SUBCASE("no field gives the bare levels") {
        const fs::path cfg = write_config("dressed0", "[pulse]\narea = 0\ndetuning = 0.3\n");
        REQUIRE(run("dressed --config " + cfg.string()).exit_code == 0);
        const Table t = read_table(kWork / "dressed0" / "dressed.csv");
        REQUIRE_FALSE(t.rows.empty());
        for (const auto& row : t.rows) {
            CHECK(row[t.column("re_f")] == 0.0);
            CHECK(row[t.column("e0_meV")] == doctest::Approx(-0.6));
            CHECK(row[t.column("e1_meV")] == doctest::Approx(0.0));
            CHECK(row[t.column("e2_meV")] == doctest::Approx(0.85));
        }
    }
    auto peak = [](const std::string& out, const std::string& key) {
        const auto at = out.find(key + " = ");
        REQUIRE(at != std::string::npos);
        return std::stod(out.substr(at + key.size() + 3));
    };
    auto max_rate = [](const Table& t) {
        double best = 0.0;
        for (const auto& row : t.rows) best = std::max(best, row[t.column("rate_1_0")]);
        return best;
    };

    const fs::path plateau = write_config("dressed_plateau", "[pulse]\narea = 3\ndetuning = 0.65\n");
    const Run on = run("dressed --config " + plateau.string());
    REQUIRE(on.exit_code == 0);
    const double j_peak = peak(on.out, "spectral_density_peak_meV");
    CHECK(peak(on.out, "peak_split10_meV") == doctest::Approx(j_peak).epsilon(0.2));

    const fs::path far = write_config("dressed_far", "[pulse]\narea = 3\ndetuning = 1.5\n");
    const Run off = run("dressed --config " + far.string());
    REQUIRE(off.exit_code == 0);
    CHECK(peak(off.out, "peak_split10_meV") > 1.5 * j_peak);
    CHECK(max_rate(read_table(kWork / "dressed_far" / "dressed.csv")) <
          0.2 * max_rate(read_table(kWork / "dressed_plateau" / "dressed.csv")));
}

TEST_CASE("kernel cache file") {
    const fs::path cache = kWork / "kernels" / "cache.txt";
    fs::remove(cache);
    const fs::path cfg = write_config("kernels", "[grid]\ndt = 0.8\nmemory = 3\n", "kernel_cache = " + cache.string() + "\n");
    Run r = run("kernel-cache --config " + cfg.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(cache));
    CHECK(r.out.find("tail,") != std::string::npos);
    r = run("kernel-cache --config " + cfg.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("loaded 1 kernels") != std::string::npos);

    std::ofstream(cache) << "garbage line\n";
    CHECK(run("kernel-cache --config " + cfg.string()).exit_code == 2);
}
