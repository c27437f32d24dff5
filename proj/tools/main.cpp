// attribnet command-line front end: generate networks, compute attribution
// maps, verify bounds, and run augmentation convergence experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attribnet/attribution.hpp"
#include "attribnet/augment.hpp"
#include "attribnet/bounds.hpp"
#include "attribnet/network.hpp"
#include "attribnet/rng.hpp"
#include "attribnet/stats.hpp"

namespace {

using namespace attribnet;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> dims;
  for (const std::string& tok : split(s, ',')) {
    const long v = std::stol(tok);
    if (v <= 0) throw std::runtime_error("--dims entries must be positive");
    dims.push_back(static_cast<std::size_t>(v));
  }
  if (dims.size() < 2)
    throw std::runtime_error("--dims needs at least 2 entries (input and output)");
  return dims;
}

Vector parse_vector_values(const std::string& spec) {
  std::string payload = spec;
  if (spec.rfind("csv:", 0) == 0) {
    std::ifstream in(spec.substr(4));
    if (!in) throw std::runtime_error("cannot open vector file: " + spec.substr(4));
    std::ostringstream buf;
    buf << in.rdbuf();
    payload = buf.str();
    for (char& c : payload)
      if (c == '\n' || c == '\r' || c == ' ' || c == '\t') c = ',';
  }
  Vector v;
  for (const std::string& tok : split(payload, ',')) {
    if (tok.empty()) continue;
    v.push_back(std::stod(tok));
  }
  if (v.empty()) throw std::runtime_error("empty vector: " + spec);
  return v;
}

Vector parse_q(const std::string& spec, std::size_t dim) {
  if (spec == "uniform")
    return Vector(dim, 1.0 / static_cast<double>(dim));
  if (spec.rfind("onehot:", 0) == 0) {
    const long k = std::stol(spec.substr(7));
    if (k < 0 || static_cast<std::size_t>(k) >= dim)
      throw std::runtime_error("onehot index out of range for output dim " +
                               std::to_string(dim));
    Vector q(dim, 0.0);
    q[static_cast<std::size_t>(k)] = 1.0;
    return q;
  }
  Vector q = parse_vector_values(spec);
  if (q.size() != dim)
    throw std::runtime_error("q has dim " + std::to_string(q.size()) +
                             ", expected " + std::to_string(dim));
  return q;
}

Rule parse_rule(const std::string& name, double beta, double gamma,
                bool backward_bias) {
  std::string kind = name;
  // parameter can be attached as lrp-beta:0.5 / lrp-gamma:100
  if (auto pos = name.find(':'); pos != std::string::npos) {
    kind = name.substr(0, pos);
    const double v = std::stod(name.substr(pos + 1));
    if (kind == "lrp-beta") beta = v;
    if (kind == "lrp-gamma") gamma = v;
  }
  if (kind == "gradient") return Rule::gradient();
  if (kind == "grad-x-input") return Rule::gradient_times_input();
  if (kind == "lrp-beta") return Rule::lrp_beta(beta, backward_bias);
  if (kind == "lrp-gamma") return Rule::lrp_gamma(gamma, backward_bias);
  throw std::runtime_error(
      "unknown rule '" + kind +
      "' (expected gradient|grad-x-input|lrp-beta|lrp-gamma)");
}

PhotometricRanges parse_ranges(const std::string& spec) {
  PhotometricRanges ranges;
  if (spec.empty()) return ranges;
  const auto toks = split(spec, ',');
  if (toks.size() != 8)
    throw std::runtime_error(
        "--ranges expects 8 comma-separated values "
        "(b_lo,b_hi,c_lo,c_hi,s_lo,s_hi,h_lo,h_hi)");
  double v[8];
  for (int i = 0; i < 8; ++i) v[i] = std::stod(toks[i]);
  ranges.brightness = {v[0], v[1]};
  ranges.contrast = {v[2], v[3]};
  ranges.saturation = {v[4], v[5]};
  ranges.hue = {v[6], v[7]};
  ranges.validate();
  return ranges;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attribution maps, transition-matrix bounds and convergence "
               "statistics for small feed-forward networks"};
  app.require_subcommand(1);
  app.set_config("--config");

  std::uint64_t seed = 0;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded random network file");
  std::string gen_dims, gen_out;
  double gen_sigma = 1.0;
  gen->add_option("--dims", gen_dims, "layer widths, e.g. 6,5,4,3")->required();
  gen->add_option("--sigma", gen_sigma, "weight stddev")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "random seed")->envname("ATTRIBNET_SEED");
  gen->add_option("--out", gen_out, "output network file")->required();

  // attribute
  auto* att = app.add_subcommand("attribute", "compute an attribution map");
  std::string att_net, att_input, att_rule = "gradient", att_q = "uniform", att_out;
  double att_beta = 0.0, att_gamma = 100.0;
  bool att_backward_bias = false;
  std::size_t att_layer = 0;
  att->add_option("--net", att_net, "network file")->required();
  att->add_option("--input", att_input, "input vector, inline v1,v2,... or csv:PATH")
      ->required();
  att->add_option("--rule", att_rule, "gradient|grad-x-input|lrp-beta|lrp-gamma");
  att->add_option("--beta", att_beta, "beta for lrp-beta");
  att->add_option("--gamma", att_gamma, "gamma for lrp-gamma");
  att->add_flag("--backward-bias", att_backward_bias,
                "treat bias as a virtual input in the backward pass");
  att->add_option("--q", att_q, "uniform|onehot:K|csv:PATH");
  att->add_option("--layer", att_layer, "target layer (0 = input space)");
  att->add_option("--out", att_out, "output prefix (.csv and .json)");

  // bounds
  auto* bnd = app.add_subcommand("bounds",
                                 "verify singular-value and value-range bounds");
  std::string bnd_net, bnd_input, bnd_rule = "lrp-beta", bnd_q = "uniform", bnd_out;
  double bnd_beta = 0.0, bnd_gamma = 100.0;
  bool bnd_backward_bias = false;
  bnd->add_option("--net", bnd_net, "network file")->required();
  bnd->add_option("--input", bnd_input, "input vector, inline or csv:PATH")
      ->required();
  bnd->add_option("--rule", bnd_rule, "gradient|grad-x-input|lrp-beta|lrp-gamma");
  bnd->add_option("--beta", bnd_beta, "beta for lrp-beta");
  bnd->add_option("--gamma", bnd_gamma, "gamma for lrp-gamma");
  bnd->add_flag("--backward-bias", bnd_backward_bias,
                "treat bias as a virtual input in the backward pass");
  bnd->add_option("--q", bnd_q, "uniform|onehot:K|csv:PATH");
  bnd->add_option("--out", bnd_out, "output prefix (.json and .txt)");

  // converge
  auto* cnv = app.add_subcommand("converge",
                                 "run the augmentation convergence experiment");
  std::string cnv_net, cnv_rule_a = "gradient", cnv_rule_b = "lrp-beta:0";
  std::string cnv_aug = "gaussian", cnv_norm = "none", cnv_ranges, cnv_out;
  std::string cnv_m = "25";
  std::size_t cnv_reps = 100, cnv_h = 8, cnv_w = 8;
  double cnv_noise_sigma = 1.0;
  std::string cnv_q = "uniform";
  cnv->add_option("--net", cnv_net, "network file")->required();
  cnv->add_option("--rule-a", cnv_rule_a, "gradient-family rule (ratio numerator)");
  cnv->add_option("--rule-b", cnv_rule_b, "LRP-family rule (ratio denominator)");
  cnv->add_option("--aug", cnv_aug, "gaussian|photometric");
  cnv->add_option("--noise-sigma", cnv_noise_sigma, "gaussian noise stddev");
  cnv->add_option("--ranges", cnv_ranges,
                  "photometric ranges b_lo,b_hi,c_lo,c_hi,s_lo,s_hi,h_lo,h_hi");
  cnv->add_option("--image-h", cnv_h, "image height (photometric)");
  cnv->add_option("--image-w", cnv_w, "image width (photometric)");
  cnv->add_option("--m", cnv_m, "augmentations per half, sweep as 25,50,100");
  cnv->add_option("--reps", cnv_reps, "number of base samples");
  cnv->add_option("--norm", cnv_norm, "none|l2");
  cnv->add_option("--q", cnv_q, "uniform|onehot:K|csv:PATH");
  cnv->add_option("--seed", seed, "random seed")->envname("ATTRIBNET_SEED");
  cnv->add_option("--out", cnv_out, "output prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Network net = random_network(parse_dims(gen_dims), gen_sigma, seed);
      save_network_file(net, gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (*att) {
      const Network net = load_network_file(att_net);
      const Vector x = parse_vector_values(att_input);
      const Rule rule = parse_rule(att_rule, att_beta, att_gamma, att_backward_bias);
      const Vector q = parse_q(att_q, net.output_dim());
      const AttributionMap map = attribute(net, x, rule, q, att_layer);
      if (att_out.empty()) {
        std::cout << attribution_to_csv(map);
      } else {
        write_file(att_out + ".csv", attribution_to_csv(map));
        write_file(att_out + ".json", attribution_to_json(map));
        std::cout << "wrote " << att_out << ".csv and " << att_out << ".json\n";
      }
      return 0;
    }

    if (*bnd) {
      const Network net = load_network_file(bnd_net);
      const Vector x = parse_vector_values(bnd_input);
      const Rule rule = parse_rule(bnd_rule, bnd_beta, bnd_gamma, bnd_backward_bias);
      const Vector q = parse_q(bnd_q, net.output_dim());
      const BoundsReport report = verify_network(net, x, rule, q);
      std::cout << bounds_report_to_text(report);
      if (!bnd_out.empty()) {
        write_file(bnd_out + ".json", bounds_report_to_json(report));
        write_file(bnd_out + ".txt", bounds_report_to_text(report));
      }
      return report.all_ok() ? 0 : 1;
    }

    if (*cnv) {
      if (cnv_reps == 0) throw std::runtime_error("--reps must be >= 1");
      const Network net = load_network_file(cnv_net);
      const Rule rule_a = parse_rule(cnv_rule_a, 0.0, 100.0, false);
      const Rule rule_b = parse_rule(cnv_rule_b, 0.0, 100.0, false);
      const Vector q = parse_q(cnv_q, net.output_dim());

      AugmenterConfig aug;
      if (cnv_aug == "gaussian") {
        aug.kind = AugmenterConfig::Kind::gaussian;
        aug.noise_sigma = cnv_noise_sigma;
      } else if (cnv_aug == "photometric") {
        aug.kind = AugmenterConfig::Kind::photometric;
        aug.ranges = parse_ranges(cnv_ranges);
        aug.image_height = cnv_h;
        aug.image_width = cnv_w;
        if (ImageTensor::channels * cnv_h * cnv_w != net.input_dim)
          throw std::runtime_error("image shape 3x" + std::to_string(cnv_h) + "x" +
                                   std::to_string(cnv_w) +
                                   " does not match network input dim " +
                                   std::to_string(net.input_dim));
      } else {
        throw std::runtime_error("unknown augmentation '" + cnv_aug + "'");
      }

      Normalization norm;
      if (cnv_norm == "none")
        norm = Normalization::none;
      else if (cnv_norm == "l2")
        norm = Normalization::l2;
      else
        throw std::runtime_error("unknown normalization '" + cnv_norm + "'");

      // Base samples from their own substream: standard normal vectors for
      // gaussian augmentation, uniform [0,1] images for photometric.
      std::vector<Vector> bases;
      for (std::size_t i = 0; i < cnv_reps; ++i) {
        RandomStream stream(seed, 0xbead5ULL, i);
        Vector base(net.input_dim);
        if (aug.kind == AugmenterConfig::Kind::gaussian)
          for (double& v : base) v = stream.normal();
        else
          for (double& v : base) v = stream.uniform();
        bases.push_back(std::move(base));
      }

      std::vector<ConvergenceRun> runs;
      for (const std::string& mtok : split(cnv_m, ',')) {
        const long m = std::stol(mtok);
        if (m <= 0) throw std::runtime_error("--m entries must be >= 1");
        runs.push_back(convergence_experiment(net, bases, rule_a, rule_b, aug,
                                              static_cast<std::size_t>(m), norm,
                                              seed, q));
        if (!cnv_out.empty()) {
          const std::string prefix = cnv_out + "_m" + std::to_string(m);
          write_file(prefix + ".json", convergence_run_to_json(runs.back()));
          write_file(prefix + ".csv", convergence_run_to_csv(runs.back()));
        }
      }
      const std::string table = convergence_summary_table(runs);
      std::cout << table;
      if (!cnv_out.empty()) write_file(cnv_out + "_summary.txt", table);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
