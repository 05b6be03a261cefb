#include "capsel/pdnplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"

namespace capsel {

namespace {

constexpr double kMicro = 1e-6;

bool same_frequency(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

double series(double coupling, double installed) {
    if (coupling <= 0.0 || installed <= 0.0) return 0.0;
    return coupling * installed / (coupling + installed);
}

/// Everything the search needs, evaluated once: transformed targets, part
/// admittances per (location, mask point) and coupling at each frequency.
class Evaluator {
public:
    struct Row {
        std::size_t location;
        double frequency;
        double target;
        std::vector<double> part_admittance;  // per filtered part
        std::vector<double> coupling;         // per remote location
    };

    Evaluator(const PlacementProblem& problem, PartLibrary parts) : problem_(problem), parts_(std::move(parts)) {
        const std::size_t J = problem.locations.size();
        for (std::size_t j = 0; j < J; ++j) {
            const auto& loc = problem.locations[j];
            for (const auto& point : loc.mask) {
                Row row{j, point.frequency, transform_mask(point), {}, std::vector<double>(J, 0.0)};
                for (const auto& part : parts_) {
                    row.part_admittance.push_back(part_mask_admittance(part, point, problem.bias_voltage));
                }
                for (std::size_t k = 0; k < J; ++k) {
                    if (k != j) row.coupling[k] = coupling_admittance(problem, j, k, point.frequency);
                }
                rows_.push_back(std::move(row));
            }
            any_ceff_ = any_ceff_ || loc.ceff_target > 0.0;
        }
        if (any_ceff_) {
            for (const auto& part : parts_) capacitance_.push_back(derated_capacitance(part, problem.bias_voltage));
        }
    }

    [[nodiscard]] const PartLibrary& parts() const { return parts_; }
    [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
    [[nodiscard]] std::size_t num_parts() const { return parts_.size(); }
    [[nodiscard]] std::size_t num_locations() const { return problem_.locations.size(); }
    [[nodiscard]] bool has_ceff() const { return any_ceff_; }
    [[nodiscard]] double capacitance(std::size_t i) const { return capacitance_[i]; }

    [[nodiscard]] double achieved(const Row& row, const CountMatrix& n) const {
        const std::size_t J = num_locations();
        double local = 0.0;
        double remote = 0.0;
        for (std::size_t k = 0; k < J; ++k) {
            double installed = 0.0;
            for (std::size_t i = 0; i < parts_.size(); ++i) installed += static_cast<double>(n(i, k)) * row.part_admittance[i];
            if (k == row.location) {
                local = installed;
            } else {
                remote += series(row.coupling[k], installed);
            }
        }
        return local + remote;
    }

    [[nodiscard]] double local_capacitance(std::size_t j, const CountMatrix& n) const {
        if (!any_ceff_) return 0.0;
        double c = 0.0;
        for (std::size_t i = 0; i < parts_.size(); ++i) c += static_cast<double>(n(i, j)) * capacitance_[i];
        return c;
    }

    [[nodiscard]] bool feasible(const CountMatrix& n) const {
        for (const auto& row : rows_) {
            if (!row_satisfied(achieved(row, n), row.target)) return false;
        }
        for (std::size_t j = 0; j < num_locations(); ++j) {
            const double target = problem_.locations[j].ceff_target;
            if (target > 0.0 && !row_satisfied(local_capacitance(j, n), target)) return false;
        }
        return true;
    }

    [[nodiscard]] double unit_cost(std::size_t i, std::size_t j) const {
        return problem_.locations[j].k_weight * parts_[i].cost.value() + parts_[i].area;
    }

    [[nodiscard]] const PlacementProblem& problem() const { return problem_; }

private:
    const PlacementProblem& problem_;
    PartLibrary parts_;
    std::vector<Row> rows_;
    std::vector<double> capacitance_;
    bool any_ceff_ = false;
};

CountMatrix caps_for(const Evaluator& ev) {
    const std::size_t I = ev.num_parts();
    const std::size_t J = ev.num_locations();
    CountMatrix caps(I, J, 0);
    for (std::size_t i = 0; i < I; ++i) {
        long any_row = 0;
        for (const auto& row : ev.rows()) any_row = std::max(any_row, covering_count(row.target, row.part_admittance[i]));
        for (std::size_t j = 0; j < J; ++j) {
            long cap = any_row;
            const double ceff = ev.problem().locations[j].ceff_target;
            if (ceff > 0.0) cap = std::max(cap, covering_count(ceff, ev.capacitance(i)));
            caps(i, j) = cap;
        }
    }
    return caps;
}

MilpModel merged_for(const Evaluator& ev, const CountMatrix& caps) {
    const std::size_t I = ev.num_parts();
    const auto& locs = ev.problem().locations;
    MilpModel model;
    for (std::size_t i = 0; i < I; ++i) {
        const auto& part = ev.parts()[i];
        double best = std::numeric_limits<double>::infinity();
        long cap = 0;
        for (std::size_t j = 0; j < locs.size(); ++j) {
            best = std::min(best, ev.unit_cost(i, j));
            cap += caps(i, j);
        }
        model.variable_ids.push_back(part.id);
        model.objective.push_back(best);
        model.upper_bounds.push_back(cap);
        model.unit_costs.push_back(part.cost);
        model.unit_areas.push_back(part.area);
    }
    for (const auto& row : ev.rows()) {
        CoveringRow r{locs[row.location].label + ":" + mask_label(row.frequency), {}, row.target};
        for (std::size_t i = 0; i < I; ++i) r.entries.push_back({i, row.part_admittance[i]});
        model.rows.push_back(std::move(r));
    }
    double total_ceff = 0.0;
    for (const auto& loc : locs) total_ceff += loc.ceff_target;
    if (total_ceff > 0.0) {
        CoveringRow r{"ceff", {}, total_ceff};
        for (std::size_t i = 0; i < I; ++i) r.entries.push_back({i, ev.capacitance(i)});
        model.rows.push_back(std::move(r));
    }
    return model;
}

std::vector<LocationReport> report_for(const Evaluator& ev, const CountMatrix& n) {
    const auto& locs = ev.problem().locations;
    std::vector<LocationReport> out(locs.size());
    for (std::size_t j = 0; j < locs.size(); ++j) {
        out[j].label = locs[j].label;
        out[j].ceff_target = locs[j].ceff_target;
        out[j].ceff_achieved = ev.local_capacitance(j, n);
        if (locs[j].ceff_target > 0.0) out[j].satisfied = row_satisfied(out[j].ceff_achieved, locs[j].ceff_target);
    }
    for (const auto& row : ev.rows()) {
        MaskCheck check{row.frequency, ev.achieved(row, n), row.target, false};
        check.satisfied = row_satisfied(check.achieved, check.target);
        auto& loc = out[row.location];
        loc.satisfied = loc.satisfied && check.satisfied;
        loc.mask.push_back(check);
    }
    return out;
}

/// Depth-first search over variables ordered location-major, values
/// ascending, so the first optimum found is the lexicographically smallest.
class PlacementSearch {
public:
    PlacementSearch(const Evaluator& ev, const CountMatrix& caps, std::size_t node_limit)
        : ev_(ev), caps_(caps), node_limit_(node_limit), I_(ev.num_parts()), J_(ev.num_locations()),
          counts_(I_, J_, 0) {}

    void run() { descend(0, 0.0); }

    [[nodiscard]] const std::optional<CountMatrix>& best() const { return best_; }
    [[nodiscard]] double best_objective() const { return best_objective_; }
    [[nodiscard]] std::size_t nodes() const { return nodes_; }

private:
    [[nodiscard]] std::size_t part_of(std::size_t v) const { return v % I_; }
    [[nodiscard]] std::size_t location_of(std::size_t v) const { return v / I_; }
    [[nodiscard]] double tol() const { return 1e-9 * std::max(1.0, std::abs(best_objective_)); }

    void descend(std::size_t depth, double fixed_cost) {
        if (++nodes_ > node_limit_) {
            throw ResourceLimitError("placement search exceeded " + std::to_string(node_limit_) + " nodes");
        }
        if (best_ && fixed_cost >= best_objective_ - tol()) return;
        const std::size_t nv = I_ * J_;
        if (depth == nv) {
            if (ev_.feasible(counts_)) {
                best_ = counts_;
                best_objective_ = fixed_cost;
            }
            return;
        }
        if (!optimistic_feasible(depth)) return;
        const auto bound = relaxation_bound(depth);
        if (!bound) return;
        if (best_ && fixed_cost + *bound >= best_objective_ - tol()) return;

        const std::size_t i = part_of(depth);
        const std::size_t j = location_of(depth);
        const double unit = ev_.unit_cost(i, j);
        for (long value = 0; value <= caps_(i, j); ++value) {
            counts_(i, j) = value;
            descend(depth + 1, fixed_cost + unit * static_cast<double>(value));
        }
        counts_(i, j) = 0;
    }

    /// Admittance is monotone in every count, so if the free variables at
    /// their caps cannot satisfy a row, nothing below this node can.
    [[nodiscard]] bool optimistic_feasible(std::size_t depth) const {
        CountMatrix filled = counts_;
        for (std::size_t v = depth; v < I_ * J_; ++v) filled(part_of(v), location_of(v)) = caps_(part_of(v), location_of(v));
        return ev_.feasible(filled);
    }

    /// LP over the free variables with every coupled contribution counted in
    /// full (infinite coupling); fixed variables enter the right-hand sides.
    [[nodiscard]] std::optional<double> relaxation_bound(std::size_t depth) const {
        const std::size_t nv = I_ * J_;
        const std::size_t nfree = nv - depth;
        LinearProgram lp;
        lp.objective.resize(nfree);
        lp.lower.assign(nfree, 0.0);
        lp.upper.resize(nfree);
        for (std::size_t v = depth; v < nv; ++v) {
            lp.objective[v - depth] = ev_.unit_cost(part_of(v), location_of(v));
            lp.upper[v - depth] = static_cast<double>(caps_(part_of(v), location_of(v)));
        }
        auto coefficient = [&](const Evaluator::Row& row, std::size_t v) {
            const std::size_t k = location_of(v);
            if (k != row.location && row.coupling[k] <= 0.0) return 0.0;
            return row.part_admittance[part_of(v)];
        };
        for (const auto& row : ev_.rows()) {
            double rhs = row.target;
            for (std::size_t v = 0; v < depth; ++v) rhs -= coefficient(row, v) * static_cast<double>(counts_(part_of(v), location_of(v)));
            if (rhs <= 0.0) continue;
            std::vector<double> dense(nfree);
            for (std::size_t v = depth; v < nv; ++v) dense[v - depth] = coefficient(row, v);
            lp.rows.push_back(std::move(dense));
            lp.rhs.push_back(rhs * (1.0 - 1e-9));
        }
        for (std::size_t j = 0; j < J_; ++j) {
            const double target = ev_.problem().locations[j].ceff_target;
            if (target <= 0.0) continue;
            double rhs = target;
            std::vector<double> dense(nfree, 0.0);
            for (std::size_t v = 0; v < nv; ++v) {
                if (location_of(v) != j) continue;
                if (v < depth) {
                    rhs -= ev_.capacitance(part_of(v)) * static_cast<double>(counts_(part_of(v), j));
                } else {
                    dense[v - depth] = ev_.capacitance(part_of(v));
                }
            }
            if (rhs <= 0.0) continue;
            lp.rows.push_back(std::move(dense));
            lp.rhs.push_back(rhs * (1.0 - 1e-9));
        }
        const LpSolution sol = solve_lp(lp);
        if (sol.status != SolveStatus::optimal) return std::nullopt;
        return sol.objective;
    }

    const Evaluator& ev_;
    const CountMatrix& caps_;
    std::size_t node_limit_;
    std::size_t I_;
    std::size_t J_;
    CountMatrix counts_;
    std::optional<CountMatrix> best_;
    double best_objective_ = std::numeric_limits<double>::infinity();
    std::size_t nodes_ = 0;
};

}  // namespace

void validate_placement(const PlacementProblem& problem) {
    const std::size_t J = problem.locations.size();
    if (J == 0) throw ValidationError("locations", "placement problem needs at least one location");
    if (!(problem.bias_voltage >= 0.0)) throw ValidationError("bias_V", "bias voltage must be >= 0");
    for (const auto& loc : problem.locations) {
        if (!(loc.k_weight >= 0.0)) throw ValidationError("K_j", "location '" + loc.label + "': K_j must be >= 0");
        if (!(loc.ceff_target >= 0.0)) throw ValidationError("ceff_uF", "location '" + loc.label + "': C_eff must be >= 0");
        for (std::size_t m = 0; m < loc.mask.size(); ++m) {
            validate_mask_point(loc.mask[m]);
            if (m > 0 && !(loc.mask[m].frequency > loc.mask[m - 1].frequency)) {
                throw ValidationError("mask", "location '" + loc.label + "': mask frequencies must be strictly ascending");
            }
        }
    }
    for (std::size_t e = 0; e < problem.coupling.size(); ++e) {
        const auto& edge = problem.coupling[e];
        if (edge.a >= J || edge.b >= J) throw ValidationError("coupling", "coupling edge references a missing location");
        if (edge.a == edge.b) throw ValidationError("coupling", "coupling edge must join two different locations");
        if (!(edge.admittance >= 0.0)) throw ValidationError("Y_S", "coupling admittance must be >= 0");
        for (std::size_t f = 0; f < e; ++f) {
            const auto& other = problem.coupling[f];
            const bool same_pair = (other.a == edge.a && other.b == edge.b) || (other.a == edge.b && other.b == edge.a);
            const bool same_freq = other.frequency.has_value() == edge.frequency.has_value() &&
                                   (!edge.frequency || same_frequency(*other.frequency, *edge.frequency));
            if (same_pair && same_freq) throw ValidationError("coupling", "duplicate coupling edge");
        }
    }
    validate_filter(problem.filter);
}

double coupling_admittance(const PlacementProblem& problem, std::size_t j, std::size_t k, double frequency) {
    std::optional<double> generic;
    for (const auto& edge : problem.coupling) {
        const bool pair = (edge.a == j && edge.b == k) || (edge.a == k && edge.b == j);
        if (!pair) continue;
        if (!edge.frequency) {
            generic = edge.admittance;
        } else if (same_frequency(*edge.frequency, frequency)) {
            return edge.admittance;
        }
    }
    return generic.value_or(0.0);
}

double effective_admittance(const PlacementProblem& problem, const CountMatrix& counts, std::size_t location,
                            double frequency) {
    const PartLibrary parts = filter_parts(problem.parts, problem.filter);
    const std::size_t J = problem.locations.size();
    if (location >= J || counts.parts() != parts.size() || counts.locations() != J) {
        throw ValidationError("counts", "count matrix does not match the placement problem");
    }
    MaskPoint point{frequency, 1.0, 0.0, 0.0};
    for (const auto& m : problem.locations[location].mask) {
        if (same_frequency(m.frequency, frequency)) point = m;
    }
    double local = 0.0;
    double remote = 0.0;
    for (std::size_t k = 0; k < J; ++k) {
        double installed = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (counts(i, k) < 0) throw ValidationError("counts", "counts must be nonnegative");
            if (counts(i, k) == 0) continue;
            installed += static_cast<double>(counts(i, k)) * part_mask_admittance(parts[i], point, problem.bias_voltage);
        }
        if (k == location) {
            local = installed;
        } else {
            remote += series(coupling_admittance(problem, location, k, frequency), installed);
        }
    }
    return local + remote;
}

CountMatrix default_count_caps(const PlacementProblem& problem) {
    validate_placement(problem);
    const Evaluator ev(problem, filter_parts(problem.parts, problem.filter));
    return caps_for(ev);
}

MilpModel merged_model(const PlacementProblem& problem, const CountMatrix& caps) {
    validate_placement(problem);
    const Evaluator ev(problem, filter_parts(problem.parts, problem.filter));
    return merged_for(ev, caps);
}

std::vector<LocationReport> check_placement(const PlacementProblem& problem, const CountMatrix& counts) {
    validate_placement(problem);
    const Evaluator ev(problem, filter_parts(problem.parts, problem.filter));
    if (counts.parts() != ev.num_parts() || counts.locations() != ev.num_locations()) {
        throw ValidationError("counts", "count matrix does not match the placement problem");
    }
    return report_for(ev, counts);
}

PlacementSolution solve_placement(const PlacementProblem& problem, const PlacementConfig& config) {
    validate_placement(problem);
    const Evaluator ev(problem, filter_parts(problem.parts, problem.filter));
    const std::size_t I = ev.num_parts();
    const std::size_t J = ev.num_locations();

    bool constrained = !ev.rows().empty();
    for (const auto& loc : problem.locations) constrained = constrained || loc.ceff_target > 0.0;
    if (I == 0 && constrained) throw NoPartsError("no parts survive the filter but the placement has constraints");
    if (I * J > config.max_variables) {
        throw ResourceLimitError("placement has " + std::to_string(I * J) + " decision variables; the exact search is limited to " +
                                 std::to_string(config.max_variables));
    }

    CountMatrix caps = config.count_cap ? *config.count_cap : caps_for(ev);
    if (caps.parts() != I || caps.locations() != J) {
        throw ValidationError("count_cap", "count cap matrix does not match the filtered parts and locations");
    }

    PlacementSolution out;
    for (const auto& p : ev.parts()) out.part_ids.push_back(p.id);

    const MilpSolution merged = solve_milp(merged_for(ev, caps));
    out.nodes_explored = merged.nodes_explored;
    if (merged.status != SolveStatus::optimal) {
        out.counts = CountMatrix(I, J, 0);
        out.locations = report_for(ev, out.counts);
        return out;
    }
    out.lower_bound = merged.objective;

    PlacementSearch search(ev, caps, config.node_limit);
    search.run();
    out.nodes_explored += search.nodes();
    if (!search.best()) {
        out.counts = CountMatrix(I, J, 0);
        out.locations = report_for(ev, out.counts);
        return out;
    }
    out.counts = *search.best();
    out.objective = search.best_objective();
    out.status = SolveStatus::optimal;
    out.locations = report_for(ev, out.counts);
    return out;
}

PlacementRequest placement_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                     const PartLibrary* fallback) {
    if (!j.is_object()) throw ParseError("placement problem must be a JSON object");
    auto number = [](const nlohmann::json& o, const char* key, std::optional<double> dflt = std::nullopt) {
        if (!o.contains(key)) {
            if (dflt) return *dflt;
            throw ParseError(std::string("missing field '") + key + "'");
        }
        if (!o.at(key).is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
        return o.at(key).get<double>();
    };

    PlacementRequest req;
    auto& p = req.problem;
    p.bias_voltage = number(j, "bias_V", 0.0);
    if (j.contains("filter")) p.filter = filter_from_json(j.at("filter"));
    if (j.contains("parts")) {
        p.parts = library_from_json(j.at("parts"));
    } else if (j.contains("library")) {
        if (!j.at("library").is_string()) throw ParseError("field 'library' must be a path string");
        std::filesystem::path lib = j.at("library").get<std::string>();
        if (lib.is_relative()) lib = base_dir / lib;
        p.parts = load_library_file(lib);
    } else if (fallback != nullptr) {
        p.parts = *fallback;
    } else {
        throw ParseError("placement problem needs 'parts' or 'library'");
    }

    if (!j.contains("locations") || !j.at("locations").is_array()) throw ParseError("field 'locations' must be an array");
    std::map<std::string, std::size_t> by_label;
    for (const auto& lj : j.at("locations")) {
        if (!lj.is_object()) throw ParseError("location entries must be objects");
        Location loc;
        loc.label = lj.value("label", "Q" + std::to_string(p.locations.size() + 1));
        loc.k_weight = number(lj, "K_j");
        loc.ceff_target = number(lj, "ceff_uF", 0.0) * kMicro;
        if (lj.contains("mask")) {
            if (!lj.at("mask").is_array()) throw ParseError("location mask must be an array");
            for (const auto& m : lj.at("mask")) loc.mask.push_back(mask_point_from_json(m));
        }
        if (!by_label.emplace(loc.label, p.locations.size()).second) {
            throw ValidationError(loc.label, "duplicate location label '" + loc.label + "'");
        }
        p.locations.push_back(std::move(loc));
    }

    auto location_ref = [&](const nlohmann::json& ref) -> std::size_t {
        if (ref.is_number_unsigned() || ref.is_number_integer()) {
            const auto idx = ref.get<long long>();
            if (idx < 0 || static_cast<std::size_t>(idx) >= p.locations.size()) {
                throw ValidationError("coupling", "coupling references location index " + std::to_string(idx));
            }
            return static_cast<std::size_t>(idx);
        }
        if (ref.is_string()) {
            const auto it = by_label.find(ref.get<std::string>());
            if (it == by_label.end()) throw ValidationError("coupling", "unknown location '" + ref.get<std::string>() + "'");
            return it->second;
        }
        throw ParseError("coupling endpoints must be location labels or indices");
    };
    if (j.contains("coupling")) {
        if (!j.at("coupling").is_array()) throw ParseError("field 'coupling' must be an array");
        for (const auto& ej : j.at("coupling")) {
            if (!ej.is_object() || !ej.contains("a") || !ej.contains("b")) throw ParseError("coupling edges need 'a' and 'b'");
            CouplingEdge edge;
            edge.a = location_ref(ej.at("a"));
            edge.b = location_ref(ej.at("b"));
            if (ej.contains("freq_Hz")) edge.frequency = number(ej, "freq_Hz");
            edge.admittance = number(ej, "Y_S");
            p.coupling.push_back(edge);
        }
    }
    validate_placement(p);

    if (j.contains("count_cap")) {
        const auto parts = filter_parts(p.parts, p.filter);
        const auto& cj = j.at("count_cap");
        CountMatrix caps(parts.size(), p.locations.size(), 0);
        if (cj.is_number_integer() || cj.is_number_unsigned()) {
            const long cap = cj.get<long>();
            if (cap < 0) throw ValidationError("count_cap", "count_cap must be >= 0");
            caps = CountMatrix(parts.size(), p.locations.size(), cap);
        } else if (cj.is_object()) {
            caps = default_count_caps(p);
            for (const auto& [id, value] : cj.items()) {
                const auto it = std::find_if(parts.begin(), parts.end(), [&](const CapacitorPart& c) { return c.id == id; });
                if (it == parts.end()) throw ValidationError(id, "count_cap names unknown part '" + id + "'");
                if (!value.is_number_integer() || value.get<long>() < 0) {
                    throw ValidationError("count_cap", "count_cap values must be nonnegative integers");
                }
                const auto i = static_cast<std::size_t>(it - parts.begin());
                for (std::size_t l = 0; l < p.locations.size(); ++l) caps(i, l) = value.get<long>();
            }
        } else {
            throw ParseError("count_cap must be an integer or an object of part id -> integer");
        }
        req.config.count_cap = caps;
    }
    return req;
}

}  // namespace capsel
