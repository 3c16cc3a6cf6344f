// mmpnn: train, evaluate, approximate, collapse, normalize and translate
// min-max-plus networks stored as JSON model files.
//
// Exit codes: 0 success, 2 input/parse/dimension errors, 3 numeric blowup or
// indeterminate forms. Failures print one line "error[<CODE>]: <message>".

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mmpnn/mmpnn.hpp"

namespace {

using namespace mmpnn;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Blowup:
    case ErrorCode::IndeterminateForm: return 3;
    default: return 2;
  }
}

// Input CSV for eval/normalize: x1..xd with optional y1..yp.
Dataset load_inputs(const std::string& path, const Network& net, bool need_targets) {
  Dataset ds = load_dataset(path);
  if (ds.input_dim() != net.input_dim()) {
    fail(ErrorCode::ShapeMismatch, path + ":1: " + std::to_string(ds.input_dim()) +
                                       " input columns, model expects " +
                                       std::to_string(net.input_dim()));
  }
  const std::size_t p = ds.output_dim();
  if ((need_targets || p != 0) && p != net.output_dim()) {
    fail(ErrorCode::ShapeMismatch, path + ":1: " + std::to_string(p) +
                                       " target columns, model produces " +
                                       std::to_string(net.output_dim()));
  }
  return ds;
}

Loss parse_loss(const std::string& s) {
  if (s == "mse") return Loss::MSE;
  if (s == "mae") return Loss::MAE;
  fail(ErrorCode::InvalidConfig, "--loss: expected mse or mae, got '" + s + "'");
}

std::vector<std::pair<double, double>> parse_box(const std::string& text) {
  std::vector<std::pair<double, double>> box;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string axis = text.substr(start, comma - start);
    const std::size_t colon = axis.find(':');
    if (colon == std::string::npos) {
      fail(ErrorCode::ParseError, "--box: axis '" + axis + "' is not of the form lo:hi");
    }
    try {
      const double lo = parse_scalar(axis.substr(0, colon)).value();
      const double hi = parse_scalar(axis.substr(colon + 1)).value();
      box.emplace_back(lo, hi);
    } catch (const Error&) {
      fail(ErrorCode::ParseError, "--box: axis '" + axis + "' has a malformed bound");
    }
    start = comma + 1;
  }
  return box;
}

void print_counts(const std::string& label, const OpCounts& c) {
  std::cout << "# census " << label << " multiplies=" << c.multiplies
            << " nontrivial_multiplies=" << c.nontrivial_multiplies()
            << " additions=" << c.additions << " comparisons=" << c.comparisons << "\n";
}

struct TrainArgs {
  std::string model, data, out, loss = "mse";
  double lr = 0.01;
  std::size_t epochs = 1, batch = 1, normalize_every = 0;
  std::uint64_t seed = 0;
  bool freeze_linear = false, init = false;
};

int run_train(const TrainArgs& a) {
  Network net = load_model(a.model);
  Dataset ds = load_inputs(a.data, net, /*need_targets=*/true);
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.loss = parse_loss(a.loss);
  cfg.normalize_every = a.normalize_every;
  cfg.seed = a.seed;
  if (a.freeze_linear) {
    for (const auto& l : net.layers()) cfg.trainable.push_back(l.kind() != LayerKind::linear);
  }
  if (a.init) net = initialize(net, ds.inputs, a.seed, a.freeze_linear);
  TrainResult r = train(net, ds, cfg);
  save_model(a.out, r.net);
  std::cout << "# generator=" << kGeneratorName << " seed=" << a.seed << "\n";
  std::cout << "epoch,loss\n";
  std::size_t next_event = 0;
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    std::cout << e + 1 << "," << format_scalar(r.history[e]) << "\n";
    while (next_event < r.normalizations.size() && r.normalizations[next_event].epoch == e + 1) {
      const auto& ev = r.normalizations[next_event++];
      std::cout << "# normalized epoch=" << ev.epoch
                << " outputs_unchanged=" << (ev.outputs_unchanged ? "true" : "false") << "\n";
    }
  }
  return 0;
}

int run_eval(const std::string& model, const std::string& data, const std::string& loss_name,
             bool census) {
  const Network net = load_model(model);
  const Dataset ds = load_inputs(data, net, /*need_targets=*/false);
  const Loss loss = parse_loss(loss_name);
  for (std::size_t i = 0; i < net.output_dim(); ++i) std::cout << (i ? ",y" : "y") << i + 1;
  std::cout << "\n";
  double total = 0.0;
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const Vector y = evaluate(net, ds.inputs[s]);
    for (std::size_t i = 0; i < y.size(); ++i) std::cout << (i ? "," : "") << format_scalar(y[i]);
    std::cout << "\n";
    if (ds.output_dim() != 0) total += loss_and_grad(y, ds.targets[s], loss).value;
  }
  if (ds.output_dim() != 0) {
    std::cout << "# loss " << loss_name << "=" << format_scalar(total / static_cast<double>(ds.size()))
              << "\n";
  }
  if (census) {
    const Census c = op_census(net, ds.inputs.front());
    for (std::size_t k = 0; k < c.per_layer.size(); ++k) {
      print_counts("layer=" + std::to_string(k) + " kind=" +
                       std::string(to_string(net.layer(k).kind())),
                   c.per_layer[k]);
    }
    print_counts("total", c.total);
  }
  return 0;
}

struct ApproxArgs {
  std::string target, box, variant = "2d", out;
  double delta = 0.0, lipschitz = 0.0;
};

int run_approx(const ApproxArgs& a) {
  ApproxConfig cfg;
  cfg.box = parse_box(a.box);
  cfg.delta = a.delta;
  cfg.lipschitz = a.lipschitz;
  if (a.variant == "2d") {
    cfg.variant = LinearVariant::TwoD;
  } else if (a.variant == "d+1") {
    cfg.variant = LinearVariant::DPlusOne;
  } else {
    fail(ErrorCode::InvalidConfig, "--variant: expected 2d or d+1, got '" + a.variant + "'");
  }
  check_config(cfg);
  const CsvTable table = parse_csv(read_file(a.target), a.target);
  if (table.header.size() != cfg.dim() + 1) {
    fail(ErrorCode::ShapeMismatch, a.target + ":1: expected " + std::to_string(cfg.dim()) +
                                       " coordinate columns and one value column");
  }
  std::vector<std::pair<Vector, double>> entries;
  for (const auto& r : table.rows) entries.emplace_back(Vector(r.begin(), r.end() - 1), r.back());
  const Vector values = grid_values_from_table(cfg, entries);
  const Network net = build_approximator(cfg, values);
  save_model(a.out, net);
  const double k_est = estimate_lipschitz(cfg, values);
  if (k_est > cfg.lipschitz) {
    std::cerr << "warning: table suggests Lipschitz constant " << format_scalar(k_est)
              << " > supplied " << format_scalar(cfg.lipschitz) << "; the bound may not hold\n";
  }
  std::cout << "grid_points=" << values.size() << "\n";
  std::cout << "bound=" << format_scalar(2.0 * cfg.lipschitz * cfg.delta) << "\n";
  return 0;
}

int run_collapse(const std::string& model, const std::string& out, std::size_t cap) {
  const Network net = load_model(model);
  CollapseOptions opts;
  opts.cap = cap;
  const Network lmm = collapse(net, opts);
  save_model(out, lmm);
  const CollapseStats st = collapse_stats(lmm);
  std::cout << "minplus_rows=" << st.min_plus_rows << " groups_per_output=";
  for (std::size_t i = 0; i < st.groups_per_output.size(); ++i) {
    std::cout << (i ? "," : "") << st.groups_per_output[i];
  }
  std::cout << "\n";
  return 0;
}

int run_normalize(const std::string& model, const std::string& data, const std::string& out) {
  const Network net = load_model(model);
  const Dataset ds = load_inputs(data, net, /*need_targets=*/false);
  const Network normalized = normalize_network(net, ds.inputs);
  save_model(out, normalized);
  std::cout << "samples=" << ds.size() << "\n";
  return 0;
}

int run_translate(const std::string& kind, const std::string& spec, const std::string& out) {
  TranslationKind k;
  if (kind == "maxout") {
    k = TranslationKind::maxout;
  } else if (kind == "relu") {
    k = TranslationKind::relu;
  } else if (kind == "leaky") {
    k = TranslationKind::leaky;
  } else if (kind == "lse") {
    k = TranslationKind::lse;
  } else {
    fail(ErrorCode::InvalidConfig, "--kind: expected maxout, relu, leaky or lse, got '" + kind + "'");
  }
  save_model(out, translate_spec(k, read_file(spec), spec));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Min-max-plus neural network toolkit"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model with minibatch SGD");
  train_cmd->add_option("--model", ta.model, "Input model JSON")->required();
  train_cmd->add_option("--data", ta.data, "Training CSV (x1..xd,y1..yp)")->required();
  train_cmd->add_option("--out", ta.out, "Output model JSON")->required();
  train_cmd->add_option("--lr", ta.lr, "Learning rate");
  train_cmd->add_option("--epochs", ta.epochs, "Number of epochs");
  train_cmd->add_option("--batch", ta.batch, "Minibatch size");
  train_cmd->add_option("--loss", ta.loss, "mse or mae");
  train_cmd->add_option("--normalize-every", ta.normalize_every,
                        "Restricted normalization every N epochs (0 = never)");
  train_cmd->add_flag("--freeze-linear", ta.freeze_linear, "Keep linear layers fixed");
  train_cmd->add_option("--seed", ta.seed, "Generator seed");
  train_cmd->add_flag("--init", ta.init, "Re-initialize parameters from the seed before training");

  std::string model, data, out, loss = "mse", kind, spec;
  bool census = false;
  std::size_t cap = 1'000'000;

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a CSV");
  eval_cmd->add_option("--model", model)->required();
  eval_cmd->add_option("--data", data, "CSV with x1..xd and optional y1..yp")->required();
  eval_cmd->add_option("--loss", loss, "mse or mae");
  eval_cmd->add_flag("--census", census, "Append operation counts for one forward pass");

  ApproxArgs aa;
  auto* approx_cmd = app.add_subcommand("approx", "Build a grid approximator from a value table");
  approx_cmd->add_option("--target", aa.target, "CSV: d coordinate columns, one value column")
      ->required();
  approx_cmd->add_option("--box", aa.box, "lo:hi per axis, comma separated")->required();
  approx_cmd->add_option("--delta", aa.delta, "Grid spacing")->required();
  approx_cmd->add_option("--lipschitz", aa.lipschitz, "Lipschitz constant (max norm)")->required();
  approx_cmd->add_option("--variant", aa.variant, "2d or d+1");
  approx_cmd->add_option("--out", aa.out)->required();

  auto* collapse_cmd = app.add_subcommand("collapse", "Collapse a Type II model to one LMM block");
  collapse_cmd->add_option("--model", model)->required();
  collapse_cmd->add_option("--out", out)->required();
  collapse_cmd->add_option("--cap", cap, "Maximum number of groups per expansion");

  auto* normalize_cmd = app.add_subcommand("normalize", "Restricted normalization on a data set");
  normalize_cmd->add_option("--model", model)->required();
  normalize_cmd->add_option("--data", data)->required();
  normalize_cmd->add_option("--out", out)->required();

  auto* translate_cmd = app.add_subcommand("translate", "Build a Type I model from a layer spec");
  translate_cmd->add_option("--kind", kind, "maxout, relu, leaky or lse")->required();
  translate_cmd->add_option("--spec", spec)->required();
  translate_cmd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout.flush();
    std::cerr << "error[ParseError]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (train_cmd->parsed()) return run_train(ta);
    if (eval_cmd->parsed()) return run_eval(model, data, loss, census);
    if (approx_cmd->parsed()) return run_approx(aa);
    if (collapse_cmd->parsed()) return run_collapse(model, out, cap);
    if (normalize_cmd->parsed()) return run_normalize(model, data, out);
    if (translate_cmd->parsed()) return run_translate(kind, spec, out);
  } catch (const Error& e) {
    std::cout.flush();
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error[InvalidValue]: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
