// Command line front end: parse groupoid / dynamical-system specifications,
// run verification pipelines, emit JSON/CSV reports and DOT graphs.
//
// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 usage error,
// 3 input error (I/O, schema, invalid spec).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gstar/bundle_lab.hpp"
#include "gstar/crossed_product.hpp"
#include "gstar/dot_export.hpp"
#include "gstar/duality.hpp"
#include "gstar/groupoid.hpp"
#include "gstar/groupoid_algebra.hpp"
#include "gstar/groupoid_build.hpp"
#include "gstar/induction.hpp"
#include "gstar/json_io.hpp"
#include "gstar/morita.hpp"
#include "gstar/report.hpp"

namespace {

using namespace gstar;

struct Options {
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
};

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream f(opt.out);
    if (!f) throw SpecError("cannot write to '" + opt.out + "'", "");
    f << text;
  }
}

int finish(const Options& opt, Report& rep, Stopwatch& watch) {
  rep.timing_ms = watch.ms();
  rep.seed = opt.seed;
  rep.tolerance = opt.tol;
  emit(opt, opt.format == "csv" ? rep.to_csv() : rep.to_json().dump(2));
  return rep.all_pass() ? 0 : 1;
}

SpecDocument load(const std::string& path) { return parse_spec(path); }

const FiniteGroupoid& need_groupoid(const SpecDocument& doc) {
  if (!doc.groupoid) throw SpecError("this command needs a groupoid spec", "");
  return *doc.groupoid;
}

const CrossedSystem& need_system(const SpecDocument& doc) {
  if (!doc.system) throw SpecError("this command needs a dynamical-system spec", "");
  return *doc.system;
}

Tolerances make_tol(const Options& opt) {
  Tolerances t;
  t.rank = opt.tol;
  t.invariant = std::max(1e-8, opt.tol * 10);
  return t;
}

std::string digest_of(const SpecDocument& doc) { return fnv1a_digest(serialize_spec(doc).dump()); }

int cmd_validate(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "validate";
  rep.input_digest = digest_of(doc);
  if (doc.system) {
    auto chk = validate_action(*doc.system, make_tol(opt));
    rep.add("groupoid-axioms", true);
    rep.add("action-axioms", chk.ok(), chk.ok() ? "" : chk.problems.front());
  } else {
    auto v = validate(need_groupoid(doc));
    rep.add("groupoid-axioms", v.ok(), v.ok() ? "" : std::to_string(v.violations.size()) + " violations");
    for (const auto& viol : v.violations) {
      std::ostringstream w;
      w << "(" << viol.where[0] << "," << viol.where[1] << "," << viol.where[2] << ") " << viol.detail;
      rep.add(violation_name(viol.kind), false, w.str());
    }
  }
  return finish(opt, rep, watch);
}

int cmd_describe(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  const FiniteGroupoid& G = need_groupoid(doc);
  Report rep;
  rep.pipeline = "describe";
  rep.input_digest = digest_of(doc);
  auto v = validate(G);
  rep.add("valid", v.ok());
  rep.add("elements", true, "", std::to_string(G.n));
  rep.add("units", true, "", std::to_string(G.units().size()));
  auto part = orbit_partition(G);
  rep.add("orbits", true, "", std::to_string(part.orbits.size()));
  auto q = structural_queries(G);
  rep.add("transitive", true, "", q.is_transitive ? "yes" : "no");
  rep.add("principal", true, "", q.is_principal ? "yes" : "no");
  rep.add("abelian-isotropy", true, "", q.has_abelian_isotropy ? "yes" : "no");
  rep.add("group-bundle", true, "", q.is_group_bundle ? "yes" : "no");
  std::ostringstream iso;
  for (int u : G.units()) iso << u << ":" << G.isotropy(u).size() << " ";
  rep.add("isotropy-orders", true, "", iso.str());
  return finish(opt, rep, watch);
}

int cmd_spectrum(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "spectrum";
  rep.input_digest = digest_of(doc);
  Rng rng(opt.seed);
  BlockDecomposition blocks;
  if (doc.system) {
    auto model = crossed_product_model(*doc.system, make_tol(opt));
    blocks = wedderburn(model.algebra, rng, make_tol(opt));
  } else {
    blocks = c_star_spectrum(need_groupoid(doc), rng, make_tol(opt));
  }
  rep.add_blocks(blocks);
  long long sum = 0;
  for (const auto& b : blocks.blocks) sum += static_cast<long long>(b.d) * b.d;
  rep.add("sum-of-squares-matches-dimension", sum == blocks.algebra_dim, "",
          std::to_string(sum) + " = " + std::to_string(blocks.algebra_dim));
  return finish(opt, rep, watch);
}

int cmd_induce(const Options& opt, const std::string& path, int unit, int character) {
  Stopwatch watch;
  auto doc = load(path);
  const FiniteGroupoid& G = need_groupoid(doc);
  Report rep;
  rep.pipeline = "induce";
  rep.input_digest = digest_of(doc);
  if (unit < 0 || unit >= G.n || !G.is_unit(unit)) throw SpecError("--unit is not a unit id", "");
  auto chars = characters(G, unit);
  if (character < 0 || character >= static_cast<int>(chars.size()))
    throw SpecError("--character out of range (fiber has " + std::to_string(chars.size()) +
                        " characters)",
                    "");
  auto N = induce_character(G, chars[character]);
  rep.add("dimension", true, "", std::to_string(N.dim));
  rep.add("irreducible", is_irreducible(N, make_tol(opt)));
  auto part = orbit_partition(G);
  int orbit_size = static_cast<int>(part.orbits[part.orbit_of_unit[unit]].size());
  rep.add("dimension-equals-orbit-size", N.dim == orbit_size, "",
          std::to_string(N.dim) + " vs " + std::to_string(orbit_size));
  return finish(opt, rep, watch);
}

int cmd_verify_main(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "verify-main-theorem";
  rep.input_digest = digest_of(doc);
  Rng rng(opt.seed);
  auto r = verify_scalar_main_theorem(need_groupoid(doc), rng, make_tol(opt));
  std::string w = r.witnesses.empty() ? "" : r.witnesses.front();
  rep.add("abelian-isotropy", r.applicable, w);
  rep.add("induced-irreducible", r.all_irreducible, w);
  rep.add("orbit-invariance", r.orbit_invariant, w);
  rep.add("orbits-inequivalent", r.orbits_inequivalent, w);
  rep.add("orbits-match-blocks", r.bijection_with_blocks,
          std::to_string(r.dual_orbit_count) + " orbits vs " + std::to_string(r.block_count) + " blocks");
  rep.add("dimensions-match-orbits", r.dims_match_orbits, w);
  return finish(opt, rep, watch);
}

int cmd_verify_crossed(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "verify-crossed";
  rep.input_digest = digest_of(doc);
  Rng rng(opt.seed);
  auto r = verify_crossed_main_theorem(need_system(doc), rng, make_tol(opt));
  std::string w = r.witnesses.empty() ? "" : r.witnesses.front();
  rep.add("abelian-isotropy", r.applicable, w);
  rep.add("fiber-reps-covariant", r.fiber_reps_covariant, w);
  rep.add("conjugation-closes", r.conjugation_closes, w);
  rep.add("orbits-match-blocks", r.bijection_with_blocks,
          std::to_string(r.orbit_count) + " orbits vs " + std::to_string(r.block_count) + " blocks");
  rep.add("dimensions-match", r.dims_match, w);
  return finish(opt, rep, watch);
}

int cmd_morita(const Options& opt, const std::string& path, int unit) {
  Stopwatch watch;
  auto doc = load(path);
  const FiniteGroupoid& G = need_groupoid(doc);
  Report rep;
  rep.pipeline = "morita-check";
  rep.input_digest = digest_of(doc);
  if (unit < 0 || unit >= G.n || !G.is_unit(unit)) throw SpecError("--unit is not a unit id", "");
  Rng rng(opt.seed);
  auto te = equivalence_from_transitive(G, unit);
  auto r = morita_bimodule_check(te.equiv, rng, make_tol(opt));
  std::string w = r.witnesses.empty() ? "" : r.witnesses.front();
  rep.add("equivalence-axioms", r.equivalence_valid, w);
  rep.add("base-point-independent", r.base_point_independent, w);
  rep.add("module-axioms", r.module_axioms, w);
  rep.add("inner-product-axioms", r.inner_product_axioms, w);
  rep.add("imprimitivity-relation", r.imprimitivity_relation, w);
  rep.add("positivity", r.positive, w);
  rep.add("fullness", r.full_left && r.full_right, w);
  std::ostringstream dims;
  for (auto [dg, dh] : r.matched_dims) dims << dg << "<->" << dh << " ";
  rep.add("blocks-correspond", r.blocks_correspond, w, dims.str());
  return finish(opt, rep, watch);
}

int cmd_svn(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "stone-von-neumann";
  rep.input_digest = digest_of(doc);
  Rng rng(opt.seed);
  auto r = stone_von_neumann_check(need_groupoid(doc), rng, make_tol(opt));
  std::string w = r.witnesses.empty() ? "" : r.witnesses.front();
  rep.add("one-block-per-unit", r.blocks_per_unit,
          std::to_string(r.block_count) + " blocks vs " + std::to_string(r.unit_count) + " units");
  rep.add("dimensions-exact", r.dims_exact, w);
  return finish(opt, rep, watch);
}

int cmd_invariant_ideal(const Options& opt, const std::string& path, const std::string& subset) {
  Stopwatch watch;
  auto doc = load(path);
  Report rep;
  rep.pipeline = "invariant-ideal";
  rep.input_digest = digest_of(doc);
  CrossedSystem sys = doc.system ? *doc.system : trivial_system(need_groupoid(doc), 1);
  std::vector<int> U;
  std::stringstream ss(subset);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) U.push_back(std::stoi(tok));
  Rng rng(opt.seed);
  auto r = invariant_ideal_sequence(sys, U, rng, make_tol(opt));
  rep.add("subset-invariant", r.invariant);
  rep.add("ideal-closed", r.ideal_closed, "", "residual " + std::to_string(r.ideal_residual));
  rep.add("restriction-star-homomorphism", r.restriction_star_hom);
  rep.add("restriction-surjective", r.restriction_surjective);
  rep.add("kernel-is-ex", r.kernel_is_ex);
  rep.add("dimension-additivity", r.dims_add_up, "",
          std::to_string(r.dim_total) + " = " + std::to_string(r.dim_ideal) + " + " +
              std::to_string(r.dim_quotient));
  return finish(opt, rep, watch);
}

int cmd_unitary_check(const Options& opt, const std::string& path) {
  Stopwatch watch;
  auto doc = load(path);
  const CrossedSystem& sys = need_system(doc);
  Report rep;
  rep.pipeline = "unitary-check";
  rep.input_digest = digest_of(doc);
  UnitaryBundleAction act;
  for (int g = 0; g < sys.G.n; ++g) {
    if (!sys.alpha[g].witness) throw SpecError("unitary-check needs unitaries on every arrow", "");
    act.u.push_back(*sys.alpha[g].witness);
  }
  Rng rng(opt.seed);
  auto r = unitary_action_check(sys.G, sys.A, act, rng, make_tol(opt));
  std::string w = r.witnesses.empty() ? "" : r.witnesses.front();
  rep.add("unitaries-valid", r.unitaries_valid, w);
  rep.add("phi-star-homomorphism", r.phi_star_hom, w);
  rep.add("phi-bijective", r.phi_bijective, w);
  rep.add("blocks-match", r.blocks_match, w);
  return finish(opt, rep, watch);
}

int cmd_counterexample(const Options& opt, int n_max) {
  Stopwatch watch;
  Report rep;
  rep.pipeline = "counterexample";
  rep.input_digest = fnv1a_digest("counterexample:" + std::to_string(n_max));
  auto iso = verify_phi_iso_up_to(n_max);
  auto demo = counterexample_demo(n_max);
  if (opt.format == "csv") {
    std::ostringstream os;
    os << "n,element,image,distance\n";
    for (std::size_t i = 0; i < demo.sequence.size(); ++i) {
      const auto& t = demo.sequence[i];
      const auto& s = demo.images[i];
      os << t.n << ",\"(" << t.m << "," << (t.n == 0 ? 0.0 : 1.0 / t.n) << ")\",\"("
         << s.a_coordinate() << "," << s.r << "," << s.x_coordinate() << ")\","
         << demo.image.distances[i] << "\n";
    }
    emit(opt, os.str());
    bool pass = iso.ok() && demo.image.verdict == Verdict::CertifiedConvergent &&
                demo.preimage.verdict == Verdict::CertifiedEscaping;
    return pass ? 0 : 1;
  }
  rep.add("phi-fiberwise-isomorphism", iso.ok());
  rep.add("image-certified-convergent", demo.image.verdict == Verdict::CertifiedConvergent, "",
          verdict_name(demo.image.verdict));
  rep.add("preimage-certified-escaping", demo.preimage.verdict == Verdict::CertifiedEscaping, "",
          "pairwise gap >= " + std::to_string(demo.preimage.escape_lower_bound));
  return finish(opt, rep, watch);
}

int cmd_double_dual(const Options& opt, int order) {
  Stopwatch watch;
  Report rep;
  rep.pipeline = "double-dual";
  rep.input_digest = fnv1a_digest("double-dual:" + std::to_string(order));
  int idx = 0;
  for (const auto& t : abelian_groups_of_order(order)) {
    auto r = finite_double_dual_check(t);
    std::string name = "group-" + std::to_string(idx++);
    rep.add(name + "-evaluation-isomorphism", r.ok(), "",
            "orthogonality residual " + std::to_string(r.orthogonality_residual));
    rep.add(name + "-orthogonality", r.orthogonality_residual < 1e-10);
  }
  return finish(opt, rep, watch);
}

int cmd_export_dot(const Options& opt, const std::string& path) {
  auto doc = load(path);
  emit(opt, export_dot(need_groupoid(doc)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gstar: a workbench for finite groupoids and their C*-algebras"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--tol", opt.tol, "numerical tolerance")->capture_default_str();
  app.add_option("--seed", opt.seed, "RNG seed for randomized decompositions")->capture_default_str();
  app.add_option("--format", opt.format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", opt.out, "write output to a file instead of stdout");

  std::string spec_path;
  int unit = 0, character = 0, n_max = 10, order = 2;
  std::string subset;

  auto* validate_cmd = app.add_subcommand("validate", "check the groupoid axioms of a spec");
  validate_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* describe_cmd = app.add_subcommand("describe", "structural summary of a groupoid");
  describe_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Wedderburn block data of the C*-algebra");
  spectrum_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* induce_cmd = app.add_subcommand("induce", "induce a stabilizer character");
  induce_cmd->add_option("spec", spec_path, "spec file")->required();
  induce_cmd->add_option("--unit", unit, "unit id")->required();
  induce_cmd->add_option("--character", character, "character index at the unit")->required();
  auto* main_cmd = app.add_subcommand("verify-main-theorem", "dual orbits match the spectrum");
  main_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* crossed_cmd = app.add_subcommand("verify-crossed", "crossed-product main theorem");
  crossed_cmd->add_option("spec", spec_path, "dynamical-system spec file")->required();
  auto* morita_cmd = app.add_subcommand("morita-check", "imprimitivity bimodule over G_u");
  morita_cmd->add_option("spec", spec_path, "spec file")->required();
  morita_cmd->add_option("--unit", unit, "base unit id")->required();
  auto* svn_cmd = app.add_subcommand("stone-von-neumann", "spectrum of C*(G x| G)");
  svn_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* ideal_cmd = app.add_subcommand("invariant-ideal", "short exact sequence for an invariant subset");
  ideal_cmd->add_option("spec", spec_path, "spec file")->required();
  ideal_cmd->add_option("--subset", subset, "comma separated unit ids");
  auto* unitary_cmd = app.add_subcommand("unitary-check", "unitary action collapse to a tensor product");
  unitary_cmd->add_option("spec", spec_path, "dynamical-system spec over a group bundle")->required();
  auto* counter_cmd = app.add_subcommand("counterexample", "open-mapping counterexample demo");
  counter_cmd->add_option("--n-max", n_max, "truncation")->capture_default_str();
  auto* dual_cmd = app.add_subcommand("double-dual", "double duality for abelian groups of an order");
  dual_cmd->add_option("--order", order, "group order")->required();
  auto* dot_cmd = app.add_subcommand("export-dot", "orbit structure as DOT text");
  dot_cmd->add_option("spec", spec_path, "spec file")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(opt, spec_path);
    if (describe_cmd->parsed()) return cmd_describe(opt, spec_path);
    if (spectrum_cmd->parsed()) return cmd_spectrum(opt, spec_path);
    if (induce_cmd->parsed()) return cmd_induce(opt, spec_path, unit, character);
    if (main_cmd->parsed()) return cmd_verify_main(opt, spec_path);
    if (crossed_cmd->parsed()) return cmd_verify_crossed(opt, spec_path);
    if (morita_cmd->parsed()) return cmd_morita(opt, spec_path, unit);
    if (svn_cmd->parsed()) return cmd_svn(opt, spec_path);
    if (ideal_cmd->parsed()) return cmd_invariant_ideal(opt, spec_path, subset);
    if (unitary_cmd->parsed()) return cmd_unitary_check(opt, spec_path);
    if (counter_cmd->parsed()) return cmd_counterexample(opt, n_max);
    if (dual_cmd->parsed()) return cmd_double_dual(opt, order);
    if (dot_cmd->parsed()) return cmd_export_dot(opt, spec_path);
  } catch (const SpecError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
