#include "duet/config.h"

#include <map>
#include <sstream>

namespace duet {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::string negatives_to_string(NegativeMode m) {
  return m == NegativeMode::judged ? "judged" : "random";
}

NegativeMode negatives_from_string(const std::string& s) {
  if (s == "judged") return NegativeMode::judged;
  if (s == "random") return NegativeMode::random;
  throw DataError("bad negatives value: " + s + " (want judged|random)");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  return parse_text(read_text_file(path), path);
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;

  auto fail = [&](const std::string& msg) {
    throw DataError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto to_int = [&](const std::string& v) {
    try {
      size_t pos = 0;
      int r = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return r;
    } catch (const std::exception&) {
      fail("expected integer, got '" + v + "'");
      return 0;
    }
  };
  auto to_u64 = [&](const std::string& v) {
    try {
      size_t pos = 0;
      uint64_t r = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return r;
    } catch (const std::exception&) {
      fail("expected unsigned integer, got '" + v + "'");
      return uint64_t{0};
    }
  };
  auto to_double = [&](const std::string& v) {
    try {
      size_t pos = 0;
      double r = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return r;
    } catch (const std::exception&) {
      fail("expected number, got '" + v + "'");
      return 0.0;
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail("empty key");

    if (key == "docs") cfg.docs = value;
    else if (key == "queries") cfg.queries = value;
    else if (key == "qrels") cfg.qrels = value;
    else if (key == "val_qrels") cfg.val_qrels = value;
    else if (key == "vocab") cfg.vocab = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "query_len") cfg.model.query_len = to_int(value);
    else if (key == "doc_len") cfg.model.doc_len = to_int(value);
    else if (key == "local_filters") cfg.model.local_filters = to_int(value);
    else if (key == "vocab_size") cfg.model.vocab_size = to_int(value);
    else if (key == "conv_window") cfg.model.conv_window = to_int(value);
    else if (key == "dist_filters") cfg.model.dist_filters = to_int(value);
    else if (key == "doc_pool") cfg.model.doc_pool = to_int(value);
    else if (key == "hidden") cfg.model.hidden = to_int(value);
    else if (key == "dropout") cfg.model.dropout_rate = to_double(value);
    else if (key == "numneg") cfg.model.numneg = to_int(value);
    else if (key == "max_ngraph") cfg.model.max_ngraph = to_int(value);
    else if (key == "learning_rate") cfg.train.learning_rate = to_double(value);
    else if (key == "minibatch") cfg.train.minibatch = to_int(value);
    else if (key == "epochs") cfg.train.epochs = to_int(value);
    else if (key == "seed") cfg.train.seed = to_u64(value);
    else if (key == "mode") cfg.train.mode = model_mode_from_string(value);
    else if (key == "negatives") cfg.train.negatives = negatives_from_string(value);
    else if (key == "max_instances") cfg.train.max_instances = static_cast<size_t>(to_u64(value));
    else if (key == "checkpoint_every") cfg.checkpoint_every = to_int(value);
    else fail("unknown key '" + key + "'");
  }
  return cfg;
}

std::string ExperimentConfig::serialize() const {
  std::map<std::string, std::string> kv;
  kv["docs"] = docs;
  kv["queries"] = queries;
  kv["qrels"] = qrels;
  kv["val_qrels"] = val_qrels;
  kv["vocab"] = vocab;
  kv["out_dir"] = out_dir;
  kv["query_len"] = std::to_string(model.query_len);
  kv["doc_len"] = std::to_string(model.doc_len);
  kv["local_filters"] = std::to_string(model.local_filters);
  kv["vocab_size"] = std::to_string(model.vocab_size);
  kv["conv_window"] = std::to_string(model.conv_window);
  kv["dist_filters"] = std::to_string(model.dist_filters);
  kv["doc_pool"] = std::to_string(model.doc_pool);
  kv["hidden"] = std::to_string(model.hidden);
  {
    std::ostringstream d;
    d << model.dropout_rate;
    kv["dropout"] = d.str();
  }
  kv["numneg"] = std::to_string(model.numneg);
  kv["max_ngraph"] = std::to_string(model.max_ngraph);
  {
    std::ostringstream d;
    d << train.learning_rate;
    kv["learning_rate"] = d.str();
  }
  kv["minibatch"] = std::to_string(train.minibatch);
  kv["epochs"] = std::to_string(train.epochs);
  kv["seed"] = std::to_string(train.seed);
  kv["mode"] = to_string(train.mode);
  kv["negatives"] = negatives_to_string(train.negatives);
  kv["max_instances"] = std::to_string(train.max_instances);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);

  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace duet
