#include "causalmb/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalmb/errors.hpp"

namespace causalmb {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kCptFloor = 1e-6;

uint64_t parent_config_count(const DiscreteBayesNet& net, int i) {
    uint64_t q = 1;
    for (int p : net.parents(i)) q *= static_cast<uint64_t>(net.arity(p));
    return q;
}

}  // namespace

DiscreteBayesNet DiscreteBayesNet::make(std::vector<std::string> names, std::vector<int> arities,
                                        std::vector<std::vector<int>> parents,
                                        std::vector<std::vector<std::vector<double>>> cpts,
                                        std::vector<int> latent, std::optional<int> treatment,
                                        std::optional<int> outcome) {
    DiscreteBayesNet net;
    net.names_ = std::move(names);
    net.arities_ = std::move(arities);
    net.parents_ = std::move(parents);
    net.cpts_ = std::move(cpts);
    net.latent_ = std::move(latent);
    net.treatment_ = treatment;
    net.outcome_ = outcome;

    const int n = net.n();
    if (static_cast<int>(net.arities_.size()) != n || static_cast<int>(net.parents_.size()) != n ||
        static_cast<int>(net.cpts_.size()) != n)
        throw validation_error("network field sizes disagree");
    net.latent_mask_.assign(n, 0);
    for (int l : net.latent_) {
        if (l < 0 || l >= n) throw validation_error("latent index out of range");
        net.latent_mask_[l] = 1;
    }
    if (treatment && net.latent_mask_[*treatment]) throw validation_error("treatment cannot be latent");
    if (outcome && net.latent_mask_[*outcome]) throw validation_error("outcome cannot be latent");

    for (int i = 0; i < n; ++i) {
        if (net.arities_[i] < 2) throw validation_error("node arity must be >= 2");
        std::sort(net.parents_[i].begin(), net.parents_[i].end());
        for (int p : net.parents_[i]) {
            if (p < 0 || p >= n) throw validation_error("parent index out of range");
            if (p >= i) throw validation_error("nodes must be listed in topological order");
        }
        const uint64_t q = parent_config_count(net, i);
        if (net.cpts_[i].size() != q)
            throw validation_error("CPT of " + net.names_[i] + " must have one row per parent configuration");
        for (const auto& row : net.cpts_[i]) {
            if (static_cast<int>(row.size()) != net.arities_[i])
                throw validation_error("CPT row width must equal the node arity");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0) throw validation_error("CPT entries must be nonnegative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                throw validation_error("CPT row of " + net.names_[i] + " does not sum to 1");
        }
    }

    // Covariates must be pre-treatment: the treatment's only descendant is
    // the outcome.
    if (treatment && outcome) {
        if (std::find(net.parents_[*outcome].begin(), net.parents_[*outcome].end(), *treatment) ==
            net.parents_[*outcome].end())
            throw validation_error("treatment must be a parent of the outcome");
        for (int i = 0; i < n; ++i) {
            if (i == *outcome) continue;
            for (int p : net.parents_[i])
                if (p == *treatment)
                    throw validation_error("covariates must be pre-treatment (no treatment children)");
        }
    }
    return net;
}

int DiscreteBayesNet::index_of(const std::string& name) const {
    for (int i = 0; i < n(); ++i)
        if (names_[i] == name) return i;
    throw validation_error("unknown node: " + name);
}

uint64_t DiscreteBayesNet::parent_config(int i, const std::vector<int>& full_assignment) const {
    uint64_t j = 0;
    for (int p : parents_[i]) j = j * static_cast<uint64_t>(arities_[p]) + full_assignment[p];
    return j;
}

std::vector<int> DiscreteBayesNet::observed() const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i)
        if (!latent_mask_[i]) out.push_back(i);
    return out;
}

Smcm DiscreteBayesNet::to_smcm() const {
    std::vector<std::pair<std::string, std::string>> directed;
    for (int i = 0; i < n(); ++i)
        for (int p : parents_[i]) directed.emplace_back(names_[p], names_[i]);
    std::vector<std::string> latent_names;
    for (int l : latent_) latent_names.push_back(names_[l]);
    std::optional<std::string> t, o;
    if (treatment_) t = names_[*treatment_];
    if (outcome_) o = names_[*outcome_];
    return Smcm::make(names_, directed, {}, t, o, latent_names);
}

DiscreteBayesNet random_net(int n_obs, int n_lat, double mean_in_degree,
                            const std::vector<int>& arity_choices, uint64_t seed) {
    if (n_obs < 2) throw validation_error("need at least the treatment and the outcome observed");
    if (n_lat < 0) throw validation_error("latent count must be nonnegative");
    if (arity_choices.empty()) throw validation_error("arity choices must be nonempty");
    for (int a : arity_choices)
        if (a < 2) throw validation_error("arities must be >= 2");

    const int n_cov = n_obs + n_lat - 2;
    const int n_total = n_cov + 2;
    const int xi = n_cov;      // treatment index
    const int yi = n_cov + 1;  // outcome index

    // Random edge slots: covariate->covariate, covariate->X, covariate->Y.
    // X -> Y is forced and counted toward the in-degree target.
    const double slots =
        static_cast<double>(n_cov) * (n_cov - 1) / 2.0 + 2.0 * static_cast<double>(n_cov);
    const double target_edges = mean_in_degree * n_total - 1.0;
    if (target_edges < 0.0) throw validation_error("mean in-degree too small for this node count");
    if (slots > 0.0 && target_edges / slots > 1.0)
        throw validation_error("mean in-degree infeasible for this node count");
    const double p_edge = slots > 0.0 ? target_edges / slots : 0.0;

    Rng root(seed);
    Rng rng_edges = root.fork(1);
    Rng rng_arity = root.fork(2);
    Rng rng_latent = root.fork(3);
    Rng rng_cpt = root.fork(4);

    std::vector<std::string> names;
    for (int i = 0; i < n_cov; ++i) names.push_back("V" + std::to_string(i + 1));
    names.push_back("X");
    names.push_back("Y");

    std::vector<int> arities(n_total, 2);
    for (int i = 0; i < n_cov; ++i)
        arities[i] = arity_choices[rng_arity.next_below(arity_choices.size())];

    std::vector<std::vector<int>> parents(n_total);
    for (int v = 1; v < n_cov; ++v)
        for (int u = 0; u < v; ++u)
            if (rng_edges.next_double() < p_edge) parents[v].push_back(u);
    for (int u = 0; u < n_cov; ++u) {
        if (rng_edges.next_double() < p_edge) parents[xi].push_back(u);
        if (rng_edges.next_double() < p_edge) parents[yi].push_back(u);
    }
    parents[yi].push_back(xi);

    std::vector<int> latent;
    {
        std::vector<int> pool(n_cov);
        for (int i = 0; i < n_cov; ++i) pool[i] = i;
        if (n_lat > n_cov) throw validation_error("more latents requested than covariates");
        for (int k = 0; k < n_lat; ++k) {
            size_t pick = rng_latent.next_below(pool.size());
            latent.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<int64_t>(pick));
        }
        std::sort(latent.begin(), latent.end());
    }

    std::vector<std::vector<std::vector<double>>> cpts(n_total);
    for (int i = 0; i < n_total; ++i) {
        uint64_t q = 1;
        for (int p : parents[i]) q *= static_cast<uint64_t>(arities[p]);
        cpts[i].resize(q);
        for (uint64_t j = 0; j < q; ++j) {
            std::vector<double> row = rng_cpt.dirichlet_flat(arities[i]);
            // Strictly positive mechanisms: floor then renormalize.
            double sum = 0.0;
            for (double& p : row) {
                p = std::max(p, kCptFloor);
                sum += p;
            }
            for (double& p : row) p /= sum;
            cpts[i][j] = std::move(row);
        }
    }

    return DiscreteBayesNet::make(std::move(names), std::move(arities), std::move(parents),
                                  std::move(cpts), std::move(latent), xi, yi);
}

DiscreteDataset sample(const DiscreteBayesNet& net, int64_t n,
                       const std::optional<Intervention>& intervene, uint64_t seed) {
    if (n < 0) throw validation_error("sample size must be nonnegative");
    if (intervene && (intervene->node < 0 || intervene->node >= net.n()))
        throw validation_error("intervention node out of range");

    const std::vector<int> observed = net.observed();
    std::vector<Variable> vars;
    for (int i : observed) vars.push_back({net.name(i), net.arity(i)});
    DiscreteDataset out(std::move(vars),
                        intervene ? Provenance::experimental : Provenance::observational);
    out.reserve(n);

    Rng rng(seed);
    std::vector<int> assignment(net.n());
    std::vector<int> row(observed.size());
    for (int64_t i = 0; i < n; ++i) {
        for (int v = 0; v < net.n(); ++v) {
            if (intervene && v == intervene->node) {
                assignment[v] = static_cast<int>(i % net.arity(v));
                continue;
            }
            const uint64_t j = net.parent_config(v, assignment);
            assignment[v] = rng.categorical(net.cpt_row(v, j));
        }
        for (size_t k = 0; k < observed.size(); ++k) row[k] = assignment[observed[k]];
        out.append_row(row);
    }
    return out;
}

namespace {

// Dense factor over a sorted variable scope; values indexed mixed-radix,
// first scope variable most significant.
struct Factor {
    std::vector<int> scope;
    std::vector<double> values;
};

uint64_t scope_size(const DiscreteBayesNet& net, const std::vector<int>& scope) {
    uint64_t s = 1;
    for (int v : scope) s *= static_cast<uint64_t>(net.arity(v));
    return s;
}

// Multiply a list of factors and sum out `eliminate` (or keep everything if
// eliminate < 0).
Factor combine(const DiscreteBayesNet& net, const std::vector<const Factor*>& fs, int eliminate) {
    std::vector<int> scope;
    for (const Factor* f : fs)
        for (int v : f->scope)
            if (std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
    std::sort(scope.begin(), scope.end());

    std::vector<int> out_scope;
    for (int v : scope)
        if (v != eliminate) out_scope.push_back(v);

    Factor out;
    out.scope = out_scope;
    out.values.assign(scope_size(net, out_scope), 0.0);

    const uint64_t total = scope_size(net, scope);
    std::vector<int> assignment(scope.size());
    for (uint64_t idx = 0; idx < total; ++idx) {
        uint64_t rem = idx;
        for (int i = static_cast<int>(scope.size()) - 1; i >= 0; --i) {
            assignment[i] = static_cast<int>(rem % net.arity(scope[i]));
            rem /= net.arity(scope[i]);
        }
        double prod = 1.0;
        for (const Factor* f : fs) {
            uint64_t fidx = 0;
            for (int v : f->scope) {
                const size_t pos = std::lower_bound(scope.begin(), scope.end(), v) - scope.begin();
                fidx = fidx * net.arity(v) + assignment[pos];
            }
            prod *= f->values[fidx];
            if (prod == 0.0) break;
        }
        if (prod == 0.0) continue;
        uint64_t oidx = 0;
        for (int v : out_scope) {
            const size_t pos = std::lower_bound(scope.begin(), scope.end(), v) - scope.begin();
            oidx = oidx * net.arity(v) + assignment[pos];
        }
        out.values[oidx] += prod;
    }
    return out;
}

}  // namespace

double exact_posterior(const DiscreteBayesNet& net, int y, int y_val,
                       const std::map<int, int>& evidence,
                       const std::optional<std::pair<int, int>>& do_assignment) {
    if (y < 0 || y >= net.n()) throw validation_error("outcome index out of range");
    if (y_val < 0 || y_val >= net.arity(y)) throw validation_error("outcome value out of range");
    if (evidence.count(y)) throw validation_error("outcome cannot appear in the evidence");
    std::map<int, int> fixed = evidence;
    if (do_assignment) {
        auto [dn, dv] = *do_assignment;
        if (dn < 0 || dn >= net.n()) throw validation_error("intervention node out of range");
        if (dn == y) throw validation_error("cannot intervene on the outcome being queried");
        if (dv < 0 || dv >= net.arity(dn)) throw validation_error("intervention value out of range");
        if (evidence.count(dn)) throw validation_error("intervention node cannot appear in the evidence");
        fixed[dn] = dv;  // mechanism removed below, value clamped here
    }
    for (const auto& [v, val] : evidence) {
        if (v < 0 || v >= net.n()) throw validation_error("evidence node out of range");
        if (val < 0 || val >= net.arity(v)) throw validation_error("evidence value out of range");
    }

    // CPT factors, skipping the intervened mechanism, sliced by fixed values.
    std::vector<Factor> factors;
    for (int v = 0; v < net.n(); ++v) {
        if (do_assignment && v == do_assignment->first) continue;
        std::vector<int> scope = net.parents(v);
        scope.push_back(v);
        std::sort(scope.begin(), scope.end());

        std::vector<int> free_scope;
        for (int s : scope)
            if (!fixed.count(s)) free_scope.push_back(s);

        Factor f;
        f.scope = free_scope;
        f.values.assign(scope_size(net, free_scope), 0.0);
        const uint64_t total = scope_size(net, free_scope);
        std::vector<int> assignment(net.n(), 0);
        for (const auto& [fv, fval] : fixed) assignment[fv] = fval;
        for (uint64_t idx = 0; idx < total; ++idx) {
            uint64_t rem = idx;
            for (int i = static_cast<int>(free_scope.size()) - 1; i >= 0; --i) {
                assignment[free_scope[i]] = static_cast<int>(rem % net.arity(free_scope[i]));
                rem /= net.arity(free_scope[i]);
            }
            f.values[idx] = net.cpt_row(v, net.parent_config(v, assignment))[assignment[v]];
        }
        factors.push_back(std::move(f));
    }

    // Eliminate everything except y, min-weight order.
    std::vector<int> to_eliminate;
    for (int v = 0; v < net.n(); ++v)
        if (v != y && !fixed.count(v)) to_eliminate.push_back(v);

    while (!to_eliminate.empty()) {
        size_t best = 0;
        uint64_t best_weight = std::numeric_limits<uint64_t>::max();
        for (size_t i = 0; i < to_eliminate.size(); ++i) {
            std::vector<int> scope;
            for (const Factor& f : factors) {
                if (std::find(f.scope.begin(), f.scope.end(), to_eliminate[i]) == f.scope.end())
                    continue;
                for (int v : f.scope)
                    if (std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
            }
            const uint64_t w = scope_size(net, scope);
            if (w < best_weight) {
                best_weight = w;
                best = i;
            }
        }
        const int victim = to_eliminate[best];
        to_eliminate.erase(to_eliminate.begin() + static_cast<int64_t>(best));

        std::vector<const Factor*> involved;
        std::vector<Factor> rest;
        for (Factor& f : factors) {
            if (std::find(f.scope.begin(), f.scope.end(), victim) != f.scope.end())
                involved.push_back(&f);
            else
                rest.push_back(std::move(f));
        }
        if (involved.empty()) continue;
        Factor merged = combine(net, involved, victim);
        rest.push_back(std::move(merged));
        factors = std::move(rest);
    }

    std::vector<const Factor*> final_ptrs;
    for (const Factor& f : factors) final_ptrs.push_back(&f);
    Factor joint = combine(net, final_ptrs, -1);

    // joint is over {y} (or empty if y itself was fixed upstream, which the
    // preconditions rule out).
    double total = 0.0;
    for (double v : joint.values) total += v;
    if (total <= 0.0) throw zero_evidence_error("evidence has probability zero");
    return joint.values[y_val] / total;
}

DiscreteBayesNet m_bias_net(double alpha) {
    if (alpha < 0.5 || alpha > 1.0)
        throw validation_error("noisy-AND strength must lie in [0.5, 1]");
    // Node order: A, B, M, X, Y with A, B latent.
    std::vector<std::string> names{"A", "B", "M", "X", "Y"};
    std::vector<int> arities{2, 2, 2, 2, 2};
    std::vector<std::vector<int>> parents{{}, {}, {0, 1}, {0}, {1, 3}};
    auto off = []() { return std::vector<double>{1.0, 0.0}; };
    std::vector<std::vector<std::vector<double>>> cpts{
        {{0.2, 0.8}},                                            // A
        {{0.2, 0.8}},                                            // B
        {off(), off(), off(), {1.0 - alpha, alpha}},             // M | A,B
        {off(), {1.0 - alpha, alpha}},                           // X | A
        {off(), off(), off(), {1.0 - alpha, alpha}},             // Y | B,X
    };
    return DiscreteBayesNet::make(std::move(names), std::move(arities), std::move(parents),
                                  std::move(cpts), {0, 1}, 3, 4);
}

}  // namespace causalmb
