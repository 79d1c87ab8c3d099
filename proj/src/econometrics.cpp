#include "quotlab/econometrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "quotlab/stats.hpp"

namespace quotlab {

void ObservationSet::add(double y, std::string_view outlet, Bias bias, Party party, int t) {
    auto [it, inserted] = outlet_ids_.try_emplace(std::string(outlet),
                                                  static_cast<int>(outlet_names_.size()));
    if (inserted) outlet_names_.push_back(std::string(outlet));
    y_.push_back(y);
    outlet_.push_back(it->second);
    bias_.push_back(bias);
    party_.push_back(party);
    t_.push_back(t);
}

std::string_view to_string(ModelForm f) {
    switch (f) {
    case ModelForm::TrendByCategory: return "eq1";
    case ModelForm::CategoryPartyInteraction: return "eq2";
    case ModelForm::TrendByCategoryParty: return "eq3";
    case ModelForm::Pooled: return "pooled";
    }
    return "?";
}

ModelForm model_form_from_string(std::string_view s) {
    if (s == "eq1") return ModelForm::TrendByCategory;
    if (s == "eq2") return ModelForm::CategoryPartyInteraction;
    if (s == "eq3") return ModelForm::TrendByCategoryParty;
    if (s == "pooled") return ModelForm::Pooled;
    throw ConfigError("unknown model form: " + std::string(s));
}

ModelSpec ModelSpec::trend_by_category() { return {ModelForm::TrendByCategory, true}; }
ModelSpec ModelSpec::category_party() { return {ModelForm::CategoryPartyInteraction, false}; }
ModelSpec ModelSpec::trend_by_category_party() { return {ModelForm::TrendByCategoryParty, true}; }
ModelSpec ModelSpec::pooled(bool absorb) { return {ModelForm::Pooled, absorb}; }

void ModelSpec::validate() const {
    if ((form == ModelForm::TrendByCategory || form == ModelForm::TrendByCategoryParty) &&
        !absorb_outlet_fe)
        throw ConfigError("trend models require absorbed outlet fixed effects");
    if (form == ModelForm::CategoryPartyInteraction && absorb_outlet_fe)
        throw ConfigError("the interaction model carries no outlet fixed effects");
}

namespace {

constexpr std::array<Bias, 5> kBiasOrder = {Bias::Left, Bias::LeftCenter, Bias::LeastBiased,
                                            Bias::RightCenter, Bias::Right};
constexpr std::array<Party, 3> kPartyOrder = {Party::Democratic, Party::Republican,
                                              Party::Other};

struct FactorLevels {
    std::vector<Bias> bias;        // present levels in enum order
    std::vector<Party> party;
    Bias bias_ref = Bias::LeastBiased;
    Party party_ref = Party::Republican;
};

FactorLevels scan_levels(const ObservationSet& obs, bool need_party) {
    std::set<Bias> bs;
    std::set<Party> ps;
    for (size_t i = 0; i < obs.size(); ++i) {
        Bias b = obs.bias()[i];
        Party p = obs.party()[i];
        if (b == Bias::Unknown)
            throw ConfigError("observation " + std::to_string(i) + " has unknown bias");
        if (need_party && p == Party::Unknown)
            throw ConfigError("observation " + std::to_string(i) + " has unknown party");
        bs.insert(b);
        ps.insert(p);
    }
    FactorLevels out;
    for (Bias b : kBiasOrder)
        if (bs.count(b)) out.bias.push_back(b);
    for (Party p : kPartyOrder)
        if (ps.count(p)) out.party.push_back(p);
    out.bias_ref = bs.count(Bias::LeastBiased) ? Bias::LeastBiased : out.bias.front();
    out.party_ref =
        need_party && !ps.count(Party::Republican) ? out.party.front() : Party::Republican;
    return out;
}

std::string bias_col(Bias b) { return "bias[" + std::string(to_string(b)) + "]"; }
std::string party_col(Party p) { return "party[" + std::string(to_string(p)) + "]"; }
std::string cell_col(Bias b, Party p) {
    return "bias_party[" + std::string(to_string(b)) + "," + std::string(to_string(p)) + "]";
}
std::string trend_col(Bias b) { return "trend[" + std::string(to_string(b)) + "]"; }
std::string trend_cell_col(Bias b, Party p) {
    return "trend[" + std::string(to_string(b)) + "," + std::string(to_string(p)) + "]";
}

// A design column is a name plus a per-row value generator.
struct ColumnDef {
    std::string name;
    // value for row i
    double (*fill)(const ObservationSet&, size_t, Bias, Party);
    Bias b = Bias::Unknown;
    Party p = Party::Unknown;
};

double fill_intercept(const ObservationSet&, size_t, Bias, Party) { return 1.0; }
double fill_bias(const ObservationSet& o, size_t i, Bias b, Party) {
    return o.bias()[i] == b ? 1.0 : 0.0;
}
double fill_party(const ObservationSet& o, size_t i, Bias, Party p) {
    return o.party()[i] == p ? 1.0 : 0.0;
}
double fill_cell(const ObservationSet& o, size_t i, Bias b, Party p) {
    return (o.bias()[i] == b && o.party()[i] == p) ? 1.0 : 0.0;
}
double fill_trend(const ObservationSet& o, size_t i, Bias b, Party) {
    return o.bias()[i] == b ? static_cast<double>(o.t()[i]) : 0.0;
}
double fill_trend_all(const ObservationSet& o, size_t i, Bias, Party) {
    return static_cast<double>(o.t()[i]);
}
double fill_trend_cell(const ObservationSet& o, size_t i, Bias b, Party p) {
    return (o.bias()[i] == b && o.party()[i] == p) ? static_cast<double>(o.t()[i]) : 0.0;
}

std::vector<ColumnDef> plan_columns(const ObservationSet& obs, const ModelSpec& spec,
                                    const FactorLevels& lv) {
    std::vector<ColumnDef> cols;
    auto add = [&](std::string name, auto fill, Bias b = Bias::Unknown,
                   Party p = Party::Unknown) {
        cols.push_back({std::move(name), fill, b, p});
    };

    switch (spec.form) {
    case ModelForm::Pooled:
        if (!spec.absorb_outlet_fe) add("(intercept)", fill_intercept);
        add("trend[all]", fill_trend_all);
        break;
    case ModelForm::TrendByCategory:
        for (Bias b : lv.bias)
            if (b != lv.bias_ref) add(bias_col(b), fill_bias, b);
        for (Bias b : lv.bias) add(trend_col(b), fill_trend, b);
        break;
    case ModelForm::CategoryPartyInteraction:
        add("(intercept)", fill_intercept);
        for (Bias b : lv.bias)
            if (b != lv.bias_ref) add(bias_col(b), fill_bias, b);
        for (Party p : lv.party)
            if (p != lv.party_ref) add(party_col(p), fill_party, Bias::Unknown, p);
        for (Bias b : lv.bias)
            for (Party p : lv.party)
                if (b != lv.bias_ref && p != lv.party_ref) add(cell_col(b, p), fill_cell, b, p);
        break;
    case ModelForm::TrendByCategoryParty:
        for (Bias b : lv.bias)
            if (b != lv.bias_ref) add(bias_col(b), fill_bias, b);
        for (Party p : lv.party)
            if (p != lv.party_ref) add(party_col(p), fill_party, Bias::Unknown, p);
        for (Bias b : lv.bias)
            for (Party p : lv.party) add(trend_cell_col(b, p), fill_trend_cell, b, p);
        break;
    }
    return cols;
}

} // namespace

Design build_design(const ObservationSet& obs, const ModelSpec& spec) {
    spec.validate();
    if (obs.size() == 0) throw EmptyData("no observations");
    if (obs.n_outlets() < 2)
        throw SingleCluster("need at least 2 outlets for cluster-robust inference");

    bool need_party = spec.form == ModelForm::CategoryPartyInteraction ||
                      spec.form == ModelForm::TrendByCategoryParty;
    bool need_bias = spec.form != ModelForm::Pooled;
    FactorLevels lv = need_bias ? scan_levels(obs, need_party)
                                : FactorLevels{{}, {}, Bias::Unknown, Party::Unknown};

    std::vector<ColumnDef> cols = plan_columns(obs, spec, lv);
    const size_t n = obs.size();
    const size_t k = cols.size();

    Design d;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    d.y.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) d.y[static_cast<Eigen::Index>(i)] = obs.y()[i];
    for (size_t j = 0; j < k; ++j) {
        const ColumnDef& c = cols[j];
        for (size_t i = 0; i < n; ++i)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                c.fill(obs, i, c.b, c.p);
    }
    d.cluster.assign(obs.outlet().begin(), obs.outlet().end());
    d.n_clusters = obs.n_outlets();
    for (size_t j = 0; j < k; ++j) d.names.push_back(cols[j].name);

    if (!spec.absorb_outlet_fe) return d;

    // Frisch-Waugh: demean X and y within outlets, then drop columns that the
    // group intercepts explain exactly (constant within every outlet).
    const int G = obs.n_outlets();
    d.n_absorbed = G;

    Vector pre_max = d.X.cwiseAbs().colwise().maxCoeff();

    Eigen::VectorXd group_n = Eigen::VectorXd::Zero(G);
    for (size_t i = 0; i < n; ++i) group_n[obs.outlet()[i]] += 1.0;

    Matrix group_mean_x = Matrix::Zero(G, static_cast<Eigen::Index>(k));
    Vector group_mean_y = Vector::Zero(G);
    for (size_t i = 0; i < n; ++i) {
        int g = obs.outlet()[i];
        group_mean_x.row(g) += d.X.row(static_cast<Eigen::Index>(i));
        group_mean_y[g] += d.y[static_cast<Eigen::Index>(i)];
    }
    group_mean_x.array().colwise() /= group_n.array();
    group_mean_y.array() /= group_n.array();
    for (size_t i = 0; i < n; ++i) {
        int g = obs.outlet()[i];
        d.X.row(static_cast<Eigen::Index>(i)) -= group_mean_x.row(g);
        d.y[static_cast<Eigen::Index>(i)] -= group_mean_y[g];
    }

    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
        double post = d.X.col(j).cwiseAbs().maxCoeff();
        if (post <= 1e-9 * std::max(1.0, pre_max[j]))
            d.dropped.push_back(d.names[static_cast<size_t>(j)]);
        else
            keep.push_back(j);
    }
    if (keep.size() != static_cast<size_t>(d.X.cols())) {
        Matrix kept(d.X.rows(), static_cast<Eigen::Index>(keep.size()));
        std::vector<std::string> kept_names;
        for (size_t j = 0; j < keep.size(); ++j) {
            kept.col(static_cast<Eigen::Index>(j)) = d.X.col(keep[j]);
            kept_names.push_back(d.names[static_cast<size_t>(keep[j])]);
        }
        d.X = std::move(kept);
        d.names = std::move(kept_names);
    }
    return d;
}

int FitResult::coef_index(std::string_view name) const {
    for (size_t i = 0; i < coef_names.size(); ++i)
        if (coef_names[i] == name) return static_cast<int>(i);
    return -1;
}

FitResult fit_ols(const Matrix& X, const Vector& y, std::span<const std::string> names) {
    if (X.rows() != y.size()) throw EmptyData("X and y row counts differ");
    if (X.rows() <= X.cols())
        throw EmptyData("need more observations than parameters");
    if (static_cast<size_t>(X.cols()) != names.size())
        throw EmptyData("column name count does not match X");

    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    const auto& R = qr.matrixR();
    const auto& perm = qr.colsPermutation().indices();

    double lead = std::fabs(R(0, 0));
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (j < R.rows() && std::fabs(R(j, j)) >= 1e-10 * lead)
            ++rank;
        else
            break;  // pivoted diagonal is non-increasing in magnitude
    }
    if (rank == 0 || lead == 0.0) throw RankZero("design matrix has rank 0");

    // solve on the pivoted leading block; trailing coefficients are zero
    Vector qty = qr.householderQ().transpose() * y;
    Vector beta_pivoted = Vector::Zero(X.cols());
    beta_pivoted.head(rank) =
        R.topLeftCorner(rank, rank).template triangularView<Eigen::Upper>().solve(
            qty.head(rank));
    Vector beta_full = qr.colsPermutation() * beta_pivoted;

    std::vector<char> kept(static_cast<size_t>(X.cols()), 0);
    for (Eigen::Index j = 0; j < rank; ++j) kept[static_cast<size_t>(perm[j])] = 1;

    FitResult fit;
    fit.n_obs = X.rows();
    fit.n_clusters = 0;
    fit.beta.resize(rank);
    Eigen::Index out = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (kept[static_cast<size_t>(j)]) {
            fit.coef_names.push_back(names[static_cast<size_t>(j)]);
            fit.beta[out++] = beta_full[j];
        } else {
            fit.dropped_columns.push_back(names[static_cast<size_t>(j)]);
        }
    }
    fit.n_params = rank;

    Vector fitted = X * beta_full;
    fit.fitted_min = fitted.minCoeff();
    fit.fitted_max = fitted.maxCoeff();
    fit.rss = (y - fitted).squaredNorm();
    return fit;
}

Matrix cluster_cov(const Matrix& X, const Vector& residuals, std::span<const int> cluster_ids,
                   long n_params) {
    if (X.rows() != residuals.size() ||
        static_cast<size_t>(X.rows()) != cluster_ids.size())
        throw EmptyData("cluster_cov: size mismatch");

    int G = 0;
    for (int id : cluster_ids) G = std::max(G, id + 1);
    if (G < 2) throw SingleCluster("cluster-robust covariance needs at least 2 clusters");

    const Eigen::Index k = X.cols();
    // per-cluster score sums s_g = X_g' e_g, accumulated in row order and
    // combined in cluster-id order
    Matrix scores = Matrix::Zero(k, G);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        scores.col(cluster_ids[static_cast<size_t>(i)]) += X.row(i).transpose() * residuals[i];

    Matrix meat = Matrix::Zero(k, k);
    for (int g = 0; g < G; ++g) meat.noalias() += scores.col(g) * scores.col(g).transpose();

    Matrix xtx = Matrix::Zero(k, k);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    xtx = xtx.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Matrix> ldlt(xtx);

    double n = static_cast<double>(X.rows());
    double gd = static_cast<double>(G);
    double kd = static_cast<double>(n_params);
    double c = (gd / (gd - 1.0)) * ((n - 1.0) / (n - kd));

    Matrix bread_meat = ldlt.solve(meat);
    Matrix v = c * ldlt.solve(bread_meat.transpose()).transpose();
    v = 0.5 * (v + v.transpose()).eval();
    return v;
}

Contrast contrast(const FitResult& fit, const std::map<std::string, double>& weights) {
    Vector w = Vector::Zero(fit.beta.size());
    for (const auto& [name, weight] : weights) {
        int idx = fit.coef_index(name);
        if (idx < 0) throw UnknownCoefficient("no coefficient named " + name);
        w[idx] = weight;
    }

    Contrast c;
    c.weights = weights;
    c.df = fit.n_clusters - 1;
    c.estimate = w.dot(fit.beta);
    double var = w.dot(fit.vcov * w);
    c.se = var > 0.0 ? std::sqrt(var) : 0.0;
    if (c.se > 0.0) {
        c.t_stat = c.estimate / c.se;
        c.p_value = student_t_two_sided_p(c.t_stat, static_cast<double>(c.df));
    } else {
        c.t_stat = c.estimate == 0.0 ? 0.0
                                     : std::copysign(std::numeric_limits<double>::infinity(),
                                                     c.estimate);
        c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    return c;
}

namespace {

bool has_party(const FactorLevels& lv, Party p) {
    return std::find(lv.party.begin(), lv.party.end(), p) != lv.party.end();
}

// Adds `scale` on a coefficient the model is expected to carry; false when
// the column was dropped (empty cell), which leaves the contrast unidentified.
bool add_term(std::map<std::string, double>& w, const std::string& name, double scale,
              const FitResult& fit) {
    if (fit.coef_index(name) < 0) return false;
    w[name] += scale;
    return true;
}

} // namespace

ModelFit fit_model(const ObservationSet& obs, const ModelSpec& spec) {
    Design d = build_design(obs, spec);
    FitResult fit = fit_ols(d.X, d.y, d.names);

    // carry forward columns removed by the FE absorption
    std::vector<std::string> dropped = d.dropped;
    dropped.insert(dropped.end(), fit.dropped_columns.begin(), fit.dropped_columns.end());
    fit.dropped_columns = std::move(dropped);
    fit.n_clusters = d.n_clusters;
    fit.n_params += d.n_absorbed;

    Vector fitted_resid(d.y.size());
    {
        Vector beta_cols = fit.beta;
        // rebuild residuals from the kept columns
        Matrix xk(d.X.rows(), fit.beta.size());
        Eigen::Index out = 0;
        for (Eigen::Index j = 0; j < d.X.cols(); ++j)
            if (fit.coef_index(d.names[static_cast<size_t>(j)]) >= 0)
                xk.col(out++) = d.X.col(j);
        fitted_resid = d.y - xk * beta_cols;
        fit.vcov = cluster_cov(xk, fitted_resid, d.cluster, fit.n_params);
    }

    ModelFit mf;
    mf.spec = spec;
    mf.fit = std::move(fit);

    FactorLevels lv;
    if (spec.form != ModelForm::Pooled)
        lv = scan_levels(obs, spec.form != ModelForm::TrendByCategory);

    auto emit = [&](std::string name, std::map<std::string, double> w) {
        if (w.empty()) return;
        mf.contrasts.push_back({std::move(name), contrast(mf.fit, w)});
    };
    const std::array<std::pair<Party, double>, 2> gap_sides = {
        std::make_pair(Party::Democratic, 1.0), std::make_pair(Party::Republican, -1.0)};

    switch (spec.form) {
    case ModelForm::Pooled:
        if (mf.fit.coef_index("trend[all]") >= 0)
            emit("trend_pp_per_year[all]", {{"trend[all]", 1200.0}});
        break;
    case ModelForm::TrendByCategory:
        for (Bias b : lv.bias)
            if (mf.fit.coef_index(trend_col(b)) >= 0)
                emit("trend_pp_per_year[" + std::string(to_string(b)) + "]",
                     {{trend_col(b), 1200.0}});
        break;
    case ModelForm::CategoryPartyInteraction:
        if (!has_party(lv, Party::Democratic) || !has_party(lv, Party::Republican)) break;
        for (Bias b : lv.bias) {
            std::map<std::string, double> w;
            bool identified = true;
            for (auto [p, sign] : gap_sides) {
                if (p != lv.party_ref)
                    identified &= add_term(w, party_col(p), 100.0 * sign, mf.fit);
                if (b != lv.bias_ref && p != lv.party_ref)
                    identified &= add_term(w, cell_col(b, p), 100.0 * sign, mf.fit);
            }
            if (identified)
                emit("sigma_gap_pp[" + std::string(to_string(b)) + "]", std::move(w));
        }
        break;
    case ModelForm::TrendByCategoryParty:
        if (!has_party(lv, Party::Democratic) || !has_party(lv, Party::Republican)) break;
        for (Bias b : lv.bias) {
            std::map<std::string, double> w;
            bool identified =
                add_term(w, trend_cell_col(b, Party::Democratic), 1200.0, mf.fit) &&
                add_term(w, trend_cell_col(b, Party::Republican), -1200.0, mf.fit);
            if (identified)
                emit("lambda_gap_pp_per_year[" + std::string(to_string(b)) + "]",
                     std::move(w));
        }
        break;
    }
    return mf;
}

} // namespace quotlab
