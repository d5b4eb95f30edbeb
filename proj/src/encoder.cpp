// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gazete::model {

using json = nlohmann::json;

namespace {

constexpr double kLnEps = 1e-12;
constexpr double kProbFloor = 1e-12;
constexpr double kPi = 3.14159265358979323846;
constexpr char kWeightsMagic[8] = {'G', 'Z', 'W', 'T', '0', '0', '0', '1'};

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  return cdf + x * pdf;
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

struct LnCache {
  Matrix xhat;
  Eigen::VectorXd inv_sigma;
};

Matrix layer_norm(const Matrix& x, const Matrix& g, const Matrix& b, LnCache& cache) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  cache.xhat.resize(rows, cols);
  cache.inv_sigma.resize(rows);
  Matrix y(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_sigma(i) = inv;
    cache.xhat.row(i) = (x.row(i).array() - mu) * inv;
    y.row(i) = cache.xhat.row(i).cwiseProduct(g.row(0)) + b.row(0);
  }
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& g, const LnCache& cache, Matrix& dg,
                           Matrix& db) {
  const Eigen::Index rows = dy.rows(), cols = dy.cols();
  Matrix dx(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    dg.row(0) += dy.row(i).cwiseProduct(cache.xhat.row(i));
    db.row(0) += dy.row(i);
    const Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(g.row(0));
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
    dx.row(i) = cache.inv_sigma(i) *
                (dxhat.array() - mean_dxhat - cache.xhat.row(i).array() * mean_dxhat_xhat);
  }
  return dx;
}

// Inverted dropout mask; entries are 0 or 1/(1-p). Sampled row-major so the
// draw order is fixed.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, DeterministicRng& rng) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mask(i, j) = rng.next_double() < p ? 0.0 : keep_scale;
    }
  }
  return mask;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

std::int32_t EncoderSpec::vocab_size() const {
  if (vocab_buckets > 0) return vocab_buckets + dataset::kSpecialTokens;
  return 0;  // sized by the vocabulary file
}

bool is_builtin_encoder(const std::string& id) { return id == "tiny:v1" || id == "mini:v1"; }

EncoderSpec builtin_encoder_spec(const std::string& id) {
  EncoderSpec spec;
  spec.id = id;
  if (id == "tiny:v1") {
    spec.vocab_buckets = 8192;
    spec.dim = 64;
    spec.layers = 1;
    spec.heads = 2;
    spec.ffn_dim = 128;
    spec.max_positions = 512;
    spec.pooling = "mean";
    spec.init_seed = fnv1a64("encoder/tiny:v1");
    return spec;
  }
  if (id == "mini:v1") {
    spec.vocab_buckets = 16384;
    spec.dim = 128;
    spec.layers = 2;
    spec.heads = 4;
    spec.ffn_dim = 256;
    spec.max_positions = 512;
    spec.pooling = "mean";
    spec.init_seed = fnv1a64("encoder/mini:v1");
    return spec;
  }
  throw std::invalid_argument("unknown builtin encoder: " + id);
}

std::unique_ptr<dataset::Tokenizer> make_tokenizer(const EncoderSpec& spec) {
  if (spec.vocab_buckets > 0) {
    return std::make_unique<dataset::HashedWordTokenizer>(spec.vocab_buckets);
  }
  if (!spec.vocab_file.empty()) {
    return std::make_unique<dataset::WordPieceTokenizer>(spec.vocab_file);
  }
  throw std::runtime_error("encoder " + spec.id +
                           " defines neither hash buckets nor a vocabulary file");
}

std::vector<std::int32_t> trim_to_mask(const dataset::EncodedExample& encoded) {
  std::size_t length = 0;
  for (const std::int32_t m : encoded.mask) length += static_cast<std::size_t>(m);
  return {encoded.ids.begin(), encoded.ids.begin() + static_cast<std::ptrdiff_t>(length)};
}

TransformerClassifier::TransformerClassifier(EncoderSpec spec, double hidden_dropout,
                                             double attention_dropout)
    : spec_(std::move(spec)),
      hidden_dropout_(hidden_dropout),
      attention_dropout_(attention_dropout) {
  if (spec_.dim % spec_.heads != 0) {
    throw std::invalid_argument("encoder dim must be divisible by head count");
  }
  if (spec_.pooling != "mean" && spec_.pooling != "cls") {
    throw std::invalid_argument("unknown pooling mode: " + spec_.pooling);
  }
  build_tensors();
}

void TransformerClassifier::build_tensors(std::int32_t vocab_override) {
  std::int32_t vocab = spec_.vocab_size();
  if (vocab == 0) vocab = vocab_override;
  if (vocab == 0) {
    dataset::WordPieceTokenizer tok(spec_.vocab_file);
    vocab = tok.vocab_size();
  }
  const int d = spec_.dim;
  const int f = spec_.ffn_dim;

  const auto add = [this](const std::string& name, Eigen::Index rows, Eigen::Index cols,
                          bool no_decay) {
    index_.emplace(name, tensors_.size());
    Tensor t;
    t.name = name;
    t.value = Matrix::Zero(rows, cols);
    t.grad = Matrix::Zero(rows, cols);
    t.no_decay = no_decay;
    tensors_.push_back(std::move(t));
  };

  add("embed.word", vocab, d, false);
  add("embed.pos", spec_.max_positions, d, false);
  add("embed.ln.g", 1, d, true);
  add("embed.ln.b", 1, d, true);
  for (int l = 0; l < spec_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) add(p + w, d, d, false);
    for (const char* b : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) add(p + b, 1, d, true);
    add(p + "attn.ln.g", 1, d, true);
    add(p + "attn.ln.b", 1, d, true);
    add(p + "ffn.w1", d, f, false);
    add(p + "ffn.b1", 1, f, true);
    add(p + "ffn.w2", f, d, false);
    add(p + "ffn.b2", 1, d, true);
    add(p + "ffn.ln.g", 1, d, true);
    add(p + "ffn.ln.b", 1, d, true);
  }
  add("pooler.w", d, d, false);
  add("pooler.b", 1, d, true);
  add("head.w", d, 2, false);
  add("head.b", 1, 2, true);
}

Tensor& TransformerClassifier::tensor(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no tensor named " + name);
  return tensors_[it->second];
}

void TransformerClassifier::init_weights() {
  // Each tensor gets its own stream so the values do not depend on build
  // order; layer-norm gains start at one, biases at zero.
  for (auto& t : tensors_) {
    if (t.name.ends_with("ln.g")) {
      t.value.setOnes();
    } else if (t.no_decay) {
      t.value.setZero();
    } else {
      auto rng = DeterministicRng::for_stream(spec_.init_seed, t.name);
      for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
          t.value(i, j) = rng.normal(0.0, 0.02);
        }
      }
    }
    t.grad.setZero();
  }
}

void TransformerClassifier::zero_grad() {
  for (auto& t : tensors_) t.grad.setZero();
}

void TransformerClassifier::set_dropout(double hidden, double attention) {
  hidden_dropout_ = hidden;
  attention_dropout_ = attention;
}

Matrix TransformerClassifier::embed(const std::vector<std::int32_t>& ids) const {
  const auto& word = tensors_[index_.at("embed.word")].value;
  const auto& pos = tensors_[index_.at("embed.pos")].value;
  const Eigen::Index length = static_cast<Eigen::Index>(ids.size());
  if (length == 0) throw std::invalid_argument("cannot encode an empty sequence");
  if (length > pos.rows()) {
    throw std::invalid_argument("sequence longer than encoder max positions");
  }
  Matrix x(length, spec_.dim);
  for (Eigen::Index t = 0; t < length; ++t) {
    const std::int32_t id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= word.rows()) throw std::out_of_range("token id out of vocabulary range");
    x.row(t) = word.row(id) + pos.row(t);
  }
  return x;
}

namespace {

struct LayerCache {
  Matrix x_in;
  Matrix q, k, v;
  std::vector<Matrix> attn_probs;  // per head, pre-dropout
  std::vector<Matrix> attn_mask;   // per head, empty when attention dropout is off
  Matrix context;                  // concatenated head outputs
  Matrix attn_out_mask;
  LnCache ln1;
  Matrix x_mid;     // after the attention layer norm
  Matrix ffn_pre;   // x_mid * w1 + b1
  Matrix ffn_act;   // gelu(ffn_pre)
  Matrix ffn_out_mask;
  LnCache ln2;
};

}  // namespace

std::array<double, 2> TransformerClassifier::forward_backward(
    const std::vector<std::int32_t>& ids, const std::array<double, 2>& target,
    DeterministicRng& dropout_rng, bool training) {
  const int d = spec_.dim;
  const int heads = spec_.heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool drop_h = training && hidden_dropout_ > 0.0;
  const bool drop_a = training && attention_dropout_ > 0.0;

  const auto value = [this](const std::string& name) -> const Matrix& {
    return tensors_[index_.at(name)].value;
  };
  const auto grad = [this](const std::string& name) -> Matrix& {
    return tensors_[index_.at(name)].grad;
  };

  // ---- forward ----
  const Matrix embedded = embed(ids);
  const Eigen::Index L = embedded.rows();

  LnCache embed_ln;
  Matrix x = layer_norm(embedded, value("embed.ln.g"), value("embed.ln.b"), embed_ln);
  Matrix embed_mask;
  if (drop_h) {
    embed_mask = dropout_mask(L, d, hidden_dropout_, dropout_rng);
    x = x.cwiseProduct(embed_mask);
  }

  std::vector<LayerCache> caches(static_cast<std::size_t>(spec_.layers));
  for (int l = 0; l < spec_.layers; ++l) {
    auto& c = caches[static_cast<std::size_t>(l)];
    const std::string p = "layer" + std::to_string(l) + ".";
    c.x_in = x;

    c.q = (c.x_in * value(p + "attn.wq")).rowwise() + value(p + "attn.bq").row(0);
    c.k = (c.x_in * value(p + "attn.wk")).rowwise() + value(p + "attn.bk").row(0);
    c.v = (c.x_in * value(p + "attn.wv")).rowwise() + value(p + "attn.bv").row(0);

    c.context.resize(L, d);
    c.attn_probs.resize(static_cast<std::size_t>(heads));
    c.attn_mask.resize(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      const auto qh = c.q.middleCols(h * dh, dh);
      const auto kh = c.k.middleCols(h * dh, dh);
      const auto vh = c.v.middleCols(h * dh, dh);
      Matrix probs = qh * kh.transpose() * scale;
      softmax_rows(probs);
      c.attn_probs[static_cast<std::size_t>(h)] = probs;
      if (drop_a) {
        c.attn_mask[static_cast<std::size_t>(h)] =
            dropout_mask(L, L, attention_dropout_, dropout_rng);
        probs = probs.cwiseProduct(c.attn_mask[static_cast<std::size_t>(h)]);
      }
      c.context.middleCols(h * dh, dh) = probs * vh;
    }

    Matrix attn_out = (c.context * value(p + "attn.wo")).rowwise() + value(p + "attn.bo").row(0);
    if (drop_h) {
      c.attn_out_mask = dropout_mask(L, d, hidden_dropout_, dropout_rng);
      attn_out = attn_out.cwiseProduct(c.attn_out_mask);
    }
    c.x_mid = layer_norm(c.x_in + attn_out, value(p + "attn.ln.g"), value(p + "attn.ln.b"), c.ln1);

    c.ffn_pre = (c.x_mid * value(p + "ffn.w1")).rowwise() + value(p + "ffn.b1").row(0);
    c.ffn_act = c.ffn_pre.unaryExpr([](double z) { return gelu(z); });
    Matrix ffn_out = (c.ffn_act * value(p + "ffn.w2")).rowwise() + value(p + "ffn.b2").row(0);
    if (drop_h) {
      c.ffn_out_mask = dropout_mask(L, d, hidden_dropout_, dropout_rng);
      ffn_out = ffn_out.cwiseProduct(c.ffn_out_mask);
    }
    x = layer_norm(c.x_mid + ffn_out, value(p + "ffn.ln.g"), value(p + "ffn.ln.b"), c.ln2);
  }

  Eigen::RowVectorXd pooled_raw;
  if (spec_.pooling == "mean") {
    pooled_raw = x.colwise().mean();
  } else {
    pooled_raw = x.row(0);
  }

  const Eigen::RowVectorXd pooler_pre =
      pooled_raw * value("pooler.w") + value("pooler.b").row(0);
  const Eigen::RowVectorXd pooler_out = pooler_pre.array().tanh();
  Eigen::RowVectorXd pooled = pooler_out;
  Matrix pooler_mask;
  if (drop_h) {
    pooler_mask = dropout_mask(1, d, hidden_dropout_, dropout_rng);
    pooled = pooled.cwiseProduct(pooler_mask.row(0));
  }

  const Eigen::RowVectorXd logits = pooled * value("head.w") + value("head.b").row(0);
  const double mx = std::max(logits(0), logits(1));
  const double e0 = std::exp(logits(0) - mx);
  const double e1 = std::exp(logits(1) - mx);
  const std::array<double, 2> probs{e0 / (e0 + e1), e1 / (e0 + e1)};

  if (!training) return probs;

  // ---- backward ----
  Eigen::RowVectorXd dlogits(2);
  dlogits << probs[0] - target[0], probs[1] - target[1];

  grad("head.w") += pooled.transpose() * dlogits;
  grad("head.b").row(0) += dlogits;
  Eigen::RowVectorXd dpooled = dlogits * value("head.w").transpose();
  if (drop_h) dpooled = dpooled.cwiseProduct(pooler_mask.row(0));

  const Eigen::RowVectorXd dpooler_pre =
      dpooled.array() * (1.0 - pooler_out.array().square());
  grad("pooler.w") += pooled_raw.transpose() * dpooler_pre;
  grad("pooler.b").row(0) += dpooler_pre;
  const Eigen::RowVectorXd dpooled_raw = dpooler_pre * value("pooler.w").transpose();

  Matrix dx = Matrix::Zero(L, d);
  if (spec_.pooling == "mean") {
    const double inv_len = 1.0 / static_cast<double>(L);
    for (Eigen::Index t = 0; t < L; ++t) dx.row(t) = dpooled_raw * inv_len;
  } else {
    dx.row(0) = dpooled_raw;
  }

  for (int l = spec_.layers - 1; l >= 0; --l) {
    auto& c = caches[static_cast<std::size_t>(l)];
    const std::string p = "layer" + std::to_string(l) + ".";

    Matrix dr2 = layer_norm_backward(dx, value(p + "ffn.ln.g"), c.ln2, grad(p + "ffn.ln.g"),
                                     grad(p + "ffn.ln.b"));
    Matrix dffn_out = dr2;
    if (drop_h) dffn_out = dffn_out.cwiseProduct(c.ffn_out_mask);

    grad(p + "ffn.w2") += c.ffn_act.transpose() * dffn_out;
    grad(p + "ffn.b2").row(0) += dffn_out.colwise().sum();
    Matrix dffn_act = dffn_out * value(p + "ffn.w2").transpose();
    Matrix dffn_pre =
        dffn_act.cwiseProduct(c.ffn_pre.unaryExpr([](double z) { return gelu_grad(z); }));

    grad(p + "ffn.w1") += c.x_mid.transpose() * dffn_pre;
    grad(p + "ffn.b1").row(0) += dffn_pre.colwise().sum();
    Matrix dx_mid = dr2 + dffn_pre * value(p + "ffn.w1").transpose();

    Matrix dr1 = layer_norm_backward(dx_mid, value(p + "attn.ln.g"), c.ln1,
                                     grad(p + "attn.ln.g"), grad(p + "attn.ln.b"));
    Matrix dattn_out = dr1;
    if (drop_h) dattn_out = dattn_out.cwiseProduct(c.attn_out_mask);

    grad(p + "attn.wo") += c.context.transpose() * dattn_out;
    grad(p + "attn.bo").row(0) += dattn_out.colwise().sum();
    Matrix dcontext = dattn_out * value(p + "attn.wo").transpose();

    Matrix dq = Matrix::Zero(L, d);
    Matrix dk = Matrix::Zero(L, d);
    Matrix dv = Matrix::Zero(L, d);
    for (int h = 0; h < heads; ++h) {
      const auto& probs = c.attn_probs[static_cast<std::size_t>(h)];
      const auto vh = c.v.middleCols(h * dh, dh);
      const auto dch = dcontext.middleCols(h * dh, dh);

      Matrix probs_dropped = probs;
      if (drop_a) probs_dropped = probs.cwiseProduct(c.attn_mask[static_cast<std::size_t>(h)]);

      dv.middleCols(h * dh, dh) = probs_dropped.transpose() * dch;
      Matrix dprobs = dch * vh.transpose();
      if (drop_a) dprobs = dprobs.cwiseProduct(c.attn_mask[static_cast<std::size_t>(h)]);

      Matrix dscores(L, L);
      for (Eigen::Index i = 0; i < L; ++i) {
        const double dot = dprobs.row(i).dot(probs.row(i));
        dscores.row(i) = (probs.row(i).array() * (dprobs.row(i).array() - dot)).matrix();
      }
      dscores *= scale;

      dq.middleCols(h * dh, dh) = dscores * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = dscores.transpose() * c.q.middleCols(h * dh, dh);
    }

    grad(p + "attn.wq") += c.x_in.transpose() * dq;
    grad(p + "attn.bq").row(0) += dq.colwise().sum();
    grad(p + "attn.wk") += c.x_in.transpose() * dk;
    grad(p + "attn.bk").row(0) += dk.colwise().sum();
    grad(p + "attn.wv") += c.x_in.transpose() * dv;
    grad(p + "attn.bv").row(0) += dv.colwise().sum();

    dx = dr1 + dq * value(p + "attn.wq").transpose() + dk * value(p + "attn.wk").transpose() +
         dv * value(p + "attn.wv").transpose();
  }

  if (drop_h) dx = dx.cwiseProduct(embed_mask);
  const Matrix dembedded = layer_norm_backward(dx, value("embed.ln.g"), embed_ln,
                                               grad("embed.ln.g"), grad("embed.ln.b"));

  auto& dword = grad("embed.word");
  auto& dpos = grad("embed.pos");
  for (Eigen::Index t = 0; t < L; ++t) {
    dword.row(ids[static_cast<std::size_t>(t)]) += dembedded.row(t);
    dpos.row(t) += dembedded.row(t);
  }

  return probs;
}

double TransformerClassifier::train_step_example(const std::vector<std::int32_t>& ids,
                                                 const std::array<double, 2>& target,
                                                 DeterministicRng& dropout_rng) {
  const auto probs = forward_backward(ids, target, dropout_rng, /*training=*/true);
  const double p0 = std::max(probs[0], kProbFloor);
  const double p1 = std::max(probs[1], kProbFloor);
  return -(target[0] * std::log(p0) + target[1] * std::log(p1));
}

std::array<double, 2> TransformerClassifier::predict(const std::vector<std::int32_t>& ids) const {
  // The non-training path reads weights only, so the cast is safe.
  auto* self = const_cast<TransformerClassifier*>(this);
  DeterministicRng unused(0);
  return self->forward_backward(ids, {0.0, 0.0}, unused, /*training=*/false);
}

std::vector<Matrix> TransformerClassifier::snapshot_values() const {
  std::vector<Matrix> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.push_back(t.value);
  return out;
}

void TransformerClassifier::restore_values(const std::vector<Matrix>& values) {
  if (values.size() != tensors_.size()) {
    throw std::invalid_argument("snapshot does not match tensor count");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != tensors_[i].value.rows() ||
        values[i].cols() != tensors_[i].value.cols()) {
      throw std::invalid_argument("snapshot shape mismatch for " + tensors_[i].name);
    }
    tensors_[i].value = values[i];
  }
}

void TransformerClassifier::save(const std::string& path) const {
  json header;
  header["format"] = "gazete-weights";
  header["encoder"] = {{"id", spec_.id},
                       {"vocab_buckets", spec_.vocab_buckets},
                       {"vocab_file", spec_.vocab_file},
                       {"dim", spec_.dim},
                       {"layers", spec_.layers},
                       {"heads", spec_.heads},
                       {"ffn_dim", spec_.ffn_dim},
                       {"max_positions", spec_.max_positions},
                       {"pooling", spec_.pooling},
                       {"init_seed", spec_.init_seed}};
  json tensor_list = json::array();
  for (const auto& t : tensors_) {
    tensor_list.push_back({{"name", t.name},
                           {"rows", t.value.rows()},
                           {"cols", t.value.cols()},
                           {"no_decay", t.no_decay}});
  }
  header["tensors"] = std::move(tensor_list);
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write weights file: " + path);
  out.write(kWeightsMagic, sizeof(kWeightsMagic));
  write_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  // Values are stored row-major as little-endian IEEE doubles.
  std::vector<double> row;
  for (const auto& t : tensors_) {
    row.resize(static_cast<std::size_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
        row[static_cast<std::size_t>(j)] = t.value(i, j);
      }
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }
  if (!out) throw std::runtime_error("short write to weights file: " + path);
}

TransformerClassifier TransformerClassifier::load(const std::string& path, double hidden_dropout,
                                                  double attention_dropout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kWeightsMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a gazete weights file: " + path);
  }
  const std::uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("truncated weights header: " + path);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw std::runtime_error("bad weights header in " + path + ": " + e.what());
  }

  const auto& enc = header.at("encoder");
  EncoderSpec spec;
  spec.id = enc.at("id").get<std::string>();
  spec.vocab_buckets = enc.at("vocab_buckets").get<std::int32_t>();
  spec.vocab_file = enc.at("vocab_file").get<std::string>();
  spec.dim = enc.at("dim").get<int>();
  spec.layers = enc.at("layers").get<int>();
  spec.heads = enc.at("heads").get<int>();
  spec.ffn_dim = enc.at("ffn_dim").get<int>();
  spec.max_positions = enc.at("max_positions").get<int>();
  spec.pooling = enc.at("pooling").get<std::string>();
  spec.init_seed = enc.at("init_seed").get<std::uint64_t>();

  std::int32_t vocab_override = 0;
  for (const auto& entry : header.at("tensors")) {
    if (entry.at("name").get<std::string>() == "embed.word") {
      vocab_override = entry.at("rows").get<std::int32_t>();
    }
  }

  TransformerClassifier model;
  model.spec_ = std::move(spec);
  model.hidden_dropout_ = hidden_dropout;
  model.attention_dropout_ = attention_dropout;
  model.build_tensors(vocab_override);

  const auto& tensor_list = header.at("tensors");
  if (tensor_list.size() != model.tensors_.size()) {
    throw std::runtime_error("weights file tensor count does not match the encoder layout");
  }
  for (std::size_t i = 0; i < model.tensors_.size(); ++i) {
    auto& t = model.tensors_[i];
    const auto& entry = tensor_list[i];
    if (entry.at("name").get<std::string>() != t.name ||
        entry.at("rows").get<Eigen::Index>() != t.value.rows() ||
        entry.at("cols").get<Eigen::Index>() != t.value.cols()) {
      throw std::runtime_error("weights file layout mismatch at tensor " + t.name);
    }
    std::vector<double> row(static_cast<std::size_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (!in) throw std::runtime_error("truncated weights data in " + path);
      for (Eigen::Index c2 = 0; c2 < t.value.cols(); ++c2) {
        t.value(r, c2) = row[static_cast<std::size_t>(c2)];
      }
    }
  }
  return model;
}

}  // namespace gazete::model
