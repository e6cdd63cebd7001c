#include "kep/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kep/elements.hpp"

namespace kep {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
    throw Error(ErrorCode::ScenarioError, message);
}

/// Wraps one JSON object, tracks which keys were consumed, and reports
/// leftovers by their full dotted path.
class Block {
  public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(label() + ": expected a JSON object");
        for (auto it = j_.begin(); it != j_.end(); ++it) pending_.insert(it.key());
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) fail(member(key) + ": missing required key");
        pending_.erase(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(member(key) + ": expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(member(key) + ": expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_boolean()) fail(member(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(member(key) + ": expected a string");
        return v.get<std::string>();
    }

    Vec3 direction(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
            !v[2].is_number()) {
            fail(member(key) + ": expected an array of 3 numbers");
        }
        return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }

    std::string member(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    /// Rejects any key that was never consumed.
    void finish() const {
        if (pending_.empty()) return;
        std::string list;
        for (const std::string& key : pending_) {
            if (!list.empty()) list += ", ";
            list += member(key);
        }
        fail("unknown key" + std::string(pending_.size() > 1 ? "s: " : ": ") + list);
    }

    std::string label() const { return path_.empty() ? "scenario" : path_; }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> pending_;
};

struct Unit {
    const char* suffix;
    double scale;
};

constexpr Unit kLength[] = {{"_m", 1.0}, {"_km", 1e3}};
constexpr Unit kSpeed[] = {{"_m_s", 1.0}, {"_km_s", 1e3}};
constexpr Unit kAngle[] = {{"_rad", 1.0}, {"_deg", M_PI / 180.0}};
constexpr Unit kMu[] = {{"_m3_s2", 1.0}, {"_km3_s2", 1e9}};
constexpr Unit kForce[] = {{"_n", 1.0}};

template <std::size_t N>
std::string unit_choices(Block& b, const std::string& base, const Unit (&units)[N]) {
    std::string list;
    for (const Unit& u : units) {
        if (!list.empty()) list += " or ";
        list += b.member(base + u.suffix);
    }
    return list;
}

/// Reads a suffixed quantity; exactly one unit variant may be present.
template <std::size_t N>
bool quantity(Block& b, const std::string& base, const Unit (&units)[N], double& out) {
    bool found = false;
    for (const Unit& u : units) {
        const std::string key = base + u.suffix;
        if (!b.has(key)) continue;
        if (found) fail(b.label() + ": give exactly one of " + unit_choices(b, base, units));
        out = b.number(key) * u.scale;
        found = true;
    }
    return found;
}

template <std::size_t N>
double require_quantity(Block& b, const std::string& base, const Unit (&units)[N]) {
    double out = 0.0;
    if (!quantity(b, base, units, out)) {
        fail(b.label() + ": missing " + unit_choices(b, base, units));
    }
    return out;
}

PhysicalConstants parse_constants(const json& j) {
    PhysicalConstants c;
    Block b(j, "constants");
    quantity(b, "mu", kMu, c.mu);
    quantity(b, "planet_radius", kLength, c.r_e);
    bool have_rc = quantity(b, "atmosphere_radius", kLength, c.r_c);
    double altitude = 0.0;
    if (quantity(b, "atmosphere_altitude", kLength, altitude)) {
        if (have_rc) {
            fail("constants: give either atmosphere_radius or atmosphere_altitude, not both");
        }
        c.r_c = c.r_e + altitude;
        have_rc = true;
    }
    if (!have_rc) c.r_c = c.r_e + 90'000.0;
    if (b.has("g0_m_s2")) c.g0 = b.number("g0_m_s2");
    b.finish();
    try {
        validate(c);
    } catch (const Error& e) {
        fail(std::string("constants: ") + e.what());
    }
    return c;
}

EngineParameters parse_engine(const json& j, double g0) {
    Block b(j, "engine");
    const double isp = b.number("isp_s");
    const double m_dry = b.has("dry_mass_kg") ? b.number("dry_mass_kg") : 0.0;
    const double bound = b.has("tau_bound_n") ? b.number("tau_bound_n") : 0.0;
    b.finish();
    EngineParameters engine;
    try {
        engine = EngineParameters::from_isp(isp, g0, bound, m_dry);
        validate(engine, g0);
    } catch (const Error& e) {
        fail(std::string("engine: ") + e.what());
    }
    return engine;
}

StateVector parse_state(const json& j, double mu) {
    Block b(j, "state");
    const char* forms[] = {"cartesian", "scalars", "coe", "meoe"};
    int present = 0;
    for (const char* f : forms) present += b.has(f) ? 1 : 0;
    if (present != 1) {
        fail("state: give exactly one of state.cartesian, state.scalars, state.coe, state.meoe");
    }

    StateVector x;
    if (b.has("cartesian")) {
        Block c(b.raw("cartesian"), "state.cartesian");
        Vec3 r(require_quantity(c, "rx", kLength), require_quantity(c, "ry", kLength),
               require_quantity(c, "rz", kLength));
        Vec3 v(require_quantity(c, "vx", kSpeed), require_quantity(c, "vy", kSpeed),
               require_quantity(c, "vz", kSpeed));
        c.finish();
        try {
            x = make_state(r, v);
        } catch (const Error& e) {
            fail(std::string("state.cartesian: ") + e.what());
        }
    } else if (b.has("scalars")) {
        Block s(b.raw("scalars"), "state.scalars");
        const double radius = require_quantity(s, "radius", kLength);
        const double speed = require_quantity(s, "speed", kSpeed);
        const double eta = require_quantity(s, "flight_path_angle", kAngle);
        Vec3 e1 = s.has("plane_e1") ? s.direction("plane_e1") : Vec3::UnitX();
        Vec3 e2 = s.has("plane_e2") ? s.direction("plane_e2") : Vec3::UnitY();
        s.finish();
        try {
            x = state_from_scalars(radius, speed, eta, e1, e2);
        } catch (const Error& e) {
            fail(std::string("state.scalars: ") + e.what());
        }
    } else if (b.has("coe")) {
        Block c(b.raw("coe"), "state.coe");
        Coe coe;
        coe.a = require_quantity(c, "a", kLength);
        coe.e = c.number("e");
        coe.inc = require_quantity(c, "i", kAngle);
        coe.omega = require_quantity(c, "omega", kAngle);
        coe.raan = require_quantity(c, "raan", kAngle);
        coe.theta = require_quantity(c, "theta", kAngle);
        c.finish();
        try {
            x = state_from_meoe(meoe_from_coe(coe), mu);
        } catch (const Error& e) {
            fail(std::string("state.coe: ") + e.what());
        }
    } else {
        Block m(b.raw("meoe"), "state.meoe");
        Meoe meoe;
        meoe.p = require_quantity(m, "p", kLength);
        meoe.ex = m.number("ex");
        meoe.ey = m.number("ey");
        meoe.hx = m.number("hx");
        meoe.hy = m.number("hy");
        meoe.l = require_quantity(m, "l", kAngle);
        m.finish();
        try {
            x = state_from_meoe(meoe, mu);
        } catch (const Error& e) {
            fail(std::string("state.meoe: ") + e.what());
        }
    }
    b.finish();
    return x;
}

void parse_solver(const json& j, SolverOptions& s) {
    Block b(j, "solver");
    if (b.has("knots")) s.knots = b.integer("knots");
    if (b.has("refined_knots")) s.refined_knots = b.integer("refined_knots");
    if (b.has("refine")) s.refine = b.boolean("refine");
    if (b.has("max_iterations")) s.max_iterations = b.integer("max_iterations");
    if (b.has("refine_max_iterations")) s.refine_max_iterations = b.integer("refine_max_iterations");
    if (b.has("multi_start")) s.multi_start = b.boolean("multi_start");
    if (b.has("parallel_starts")) s.parallel_starts = b.boolean("parallel_starts");
    if (b.has("full_thrust")) s.full_thrust = b.boolean("full_thrust");
    if (b.has("out_of_plane")) s.out_of_plane = b.boolean("out_of_plane");
    if (b.has("horizon_factor")) s.horizon_factor = b.number("horizon_factor");
    if (b.has("t_max_periods")) s.t_max_periods = b.number("t_max_periods");
    if (b.has("fd_step_rad")) s.fd_step = b.number("fd_step_rad");
    if (b.has("step_tol_rad")) s.step_tol = b.number("step_tol_rad");
    if (b.has("stall_tol_m")) s.stall_tol = b.number("stall_tol_m");
    if (b.has("stall_iters")) s.stall_iters = b.integer("stall_iters");
    if (b.has("mass_fixed_point_tol")) s.mass_fixed_point_tol = b.number("mass_fixed_point_tol");
    if (b.has("mass_fixed_point_max")) s.mass_fixed_point_max = b.integer("mass_fixed_point_max");
    if (b.has("rtol")) s.integrator.rtol = b.number("rtol");
    b.finish();
    if (s.knots < 2 || s.refined_knots < 2) fail("solver.knots: need at least 2 knots");
    if (s.horizon_factor <= 0.0) fail("solver.horizon_factor: must be positive");
}

void parse_bisection(const json& j, ScenarioFile& sc) {
    Block b(j, "bisection");
    if (quantity(b, "tau_lo", kForce, sc.tau_lo) && sc.tau_lo <= 0.0) {
        fail("bisection.tau_lo_n: must be positive");
    }
    if (quantity(b, "tau_hi", kForce, sc.tau_hi) && sc.tau_hi <= sc.tau_lo) {
        fail("bisection.tau_hi_n: must exceed bisection.tau_lo_n");
    }
    if (b.has("tolerance_n")) sc.bisection.tol = b.number("tolerance_n");
    if (b.has("s_tolerance_m")) sc.bisection.s_tol = b.number("s_tolerance_m");
    if (b.has("max_expansions")) sc.bisection.max_expansions = b.integer("max_expansions");
    if (b.has("max_iterations")) sc.bisection.max_iterations = b.integer("max_iterations");
    if (b.has("speculative")) sc.bisection.speculative = b.boolean("speculative");
    if (b.has("refine_below_width_n")) {
        sc.bisection.refine_below_width = b.number("refine_below_width_n");
    }
    b.finish();
    if (sc.bisection.tol <= 0.0) fail("bisection.tolerance_n: must be positive");
}

}  // namespace

OcpScenario ScenarioFile::ocp() const {
    if (engine.beta <= 0.0) {
        fail("engine: block is required for mission solves (set engine.isp_s)");
    }
    OcpScenario sc;
    sc.kind = kind;
    sc.anchor = state;
    if (kind == MissionKind::Dop) sc.anchor.v = -state.v;
    sc.anchor_mass = mass;
    sc.engine = engine;
    sc.constants = constants;
    sc.name = name;
    return sc;
}

SatelliteState ScenarioFile::satellite() const { return make_satellite_state(state, mass); }

ScenarioFile parse_scenario(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(origin + ": " + e.what());
    }

    ScenarioFile sc;
    Block b(j, "");
    sc.name = b.text("name");
    if (sc.name.empty()) fail("name: must not be empty");

    const std::string problem = b.text("problem");
    if (problem == "oip") {
        sc.kind = MissionKind::Oip;
    } else if (problem == "dop") {
        sc.kind = MissionKind::Dop;
    } else {
        fail("problem: expected \"oip\" or \"dop\", got \"" + problem + "\"");
    }

    if (b.has("notes")) sc.notes = b.text("notes");
    if (b.has("constants")) sc.constants = parse_constants(b.raw("constants"));
    if (b.has("engine")) sc.engine = parse_engine(b.raw("engine"), sc.constants.g0);

    sc.mass = b.number("mass_kg");
    if (sc.mass <= 0.0) fail("mass_kg: must be positive");
    if (sc.engine.m_dry >= sc.mass) fail("engine.dry_mass_kg: must be below mass_kg");

    sc.state = parse_state(b.raw("state"), sc.constants.mu);

    if (b.has("solver")) parse_solver(b.raw("solver"), sc.solver);
    if (b.has("bisection")) parse_bisection(b.raw("bisection"), sc);
    sc.bisection.solver = sc.solver;

    if (b.has("t_max_s")) {
        sc.t_max_s = b.number("t_max_s");
        if (sc.t_max_s <= 0.0) fail("t_max_s: must be positive");
    }
    if (b.has("output_dir")) sc.output_dir = b.text("output_dir");
    b.finish();
    return sc;
}

ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "cannot read scenario file: " + path);
    return parse_scenario(buffer.str(), path);
}

}  // namespace kep
