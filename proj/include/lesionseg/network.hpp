#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lesionseg/layers.hpp"

namespace lesionseg {

struct NetworkConfig {
  int in_channels = 3;
  std::vector<int> stage_channels = {16, 32, 64};
  int bottleneck_channels = 128;
  double dropout_prob = 0.5;
  bool skip_connections = true;

  int stages() const { return static_cast<int>(stage_channels.size()); }
  int stride() const { return 1 << stages(); }

  void validate() const {
    if (stage_channels.empty())
      throw ConfigError("network: at least one encoder stage required");
    for (int c : stage_channels)
      if (c < 1) throw ConfigError("network: stage channels must be >= 1");
    if (bottleneck_channels < 1)
      throw ConfigError("network: bottleneck channels must be >= 1");
    if (in_channels < 1) throw ConfigError("network: in_channels must be >= 1");
    if (dropout_prob < 0.0 || dropout_prob >= 1.0)
      throw ConfigError("network: dropout_prob must be in [0,1)");
  }

  bool operator==(const NetworkConfig&) const = default;
};

// Compact U-shaped encoder-decoder producing a per-pixel probability map
// (n,1,H,W). Inputs of any H,W >= 1 are edge-replication padded up to the
// stage stride and the output is cropped back.
template <typename T>
class Network {
public:
  explicit Network(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int S = cfg_.stages();
    int prev = cfg_.in_channels;
    for (int s = 0; s < S; ++s) {
      const int ch = cfg_.stage_channels[s];
      enc_.push_back(std::make_unique<EncStage>(prev, ch));
      prev = ch;
    }
    bott_conv_ = std::make_unique<Conv2d<T>>(prev, cfg_.bottleneck_channels, 3);
    bott_bn_ = std::make_unique<BatchNorm2d<T>>(cfg_.bottleneck_channels);
    bott_drop_ = std::make_unique<Dropout<T>>(cfg_.dropout_prob);
    prev = cfg_.bottleneck_channels;
    for (int s = S - 1; s >= 0; --s) {
      const int ch = cfg_.stage_channels[s];
      const int in = prev + (cfg_.skip_connections ? ch : 0);
      dec_.push_back(std::make_unique<DecStage>(in, ch));
      prev = ch;
    }
    head_ = std::make_unique<Conv2d<T>>(prev, 1, 1);
  }

  void init_params(RngState& rng) {
    for (auto& e : enc_) {
      e->c1.init_he_uniform(rng);
      e->c2.init_he_uniform(rng);
    }
    bott_conv_->init_he_uniform(rng);
    for (auto& d : dec_) {
      d->c1.init_he_uniform(rng);
      d->c2.init_he_uniform(rng);
    }
    head_->init_he_uniform(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, RngState* dropout_rng) {
    if (x.c != cfg_.in_channels)
      throw DataError("network: input has " + std::to_string(x.c) +
                      " channels, expected " + std::to_string(cfg_.in_channels));
    if (x.h < 1 || x.w < 1) throw DataError("network: empty input");
    orig_h_ = x.h;
    orig_w_ = x.w;
    Tensor<T> cur = pad_replicate(x, cfg_.stride());
    padded_h_ = cur.h;
    padded_w_ = cur.w;

    skips_.clear();
    for (auto& e : enc_) {
      cur = e->r1.forward(e->b1.forward(e->c1.forward(cur), mode));
      cur = e->r2.forward(e->b2.forward(e->c2.forward(cur), mode));
      skips_.push_back(cur);
      cur = e->pool.forward(cur);
    }
    cur = bott_drop_->forward(
        bott_r_.forward(bott_bn_->forward(bott_conv_->forward(cur), mode)),
        mode, dropout_rng);
    for (size_t d = 0; d < dec_.size(); ++d) {
      auto& st = *dec_[d];
      cur = st.up.forward(cur);
      if (cfg_.skip_connections)
        cur = concat_channels(cur, skips_[skips_.size() - 1 - d]);
      cur = st.r1.forward(st.b1.forward(st.c1.forward(cur), mode));
      cur = st.r2.forward(st.b2.forward(st.c2.forward(cur), mode));
    }
    Tensor<T> out = head_sig_.forward(head_->forward(cur));
    return crop(out, orig_h_, orig_w_);
  }

  // Gradient of the loss w.r.t. the forward output (cropped shape). Populates
  // every parameter gradient; the return value is the input gradient.
  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> g = embed(gout, padded_h_, padded_w_);
    g = head_sig_.backward(g);
    g = head_->backward(g);
    skip_grads_.assign(enc_.size(), Tensor<T>());
    for (size_t r = dec_.size(); r-- > 0;) {
      auto& st = *dec_[r];
      g = st.r2.backward(g);
      g = st.b2.backward(g);
      g = st.c2.backward(g);
      g = st.r1.backward(g);
      g = st.b1.backward(g);
      g = st.c1.backward(g);
      if (cfg_.skip_connections) {
        const size_t sidx = enc_.size() - 1 - r;
        const int skip_ch = cfg_.stage_channels[sidx];
        auto [gmain, gskip] = split_channels(g, g.c - skip_ch, skip_ch);
        skip_grads_[sidx] = std::move(gskip);
        g = std::move(gmain);
      }
      g = st.up.backward(g);
    }
    g = bott_drop_->backward(g);
    g = bott_r_.backward(g);
    g = bott_bn_->backward(g);
    g = bott_conv_->backward(g);
    for (size_t s = enc_.size(); s-- > 0;) {
      auto& st = *enc_[s];
      g = st.pool.backward(g);
      if (cfg_.skip_connections) add_into(g, skip_grads_[s]);
      g = st.r2.backward(g);
      g = st.b2.backward(g);
      g = st.c2.backward(g);
      g = st.r1.backward(g);
      g = st.b1.backward(g);
      g = st.c1.backward(g);
    }
    return crop(g, orig_h_, orig_w_);
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    auto add_conv = [&](const std::string& base, Conv2d<T>& c) {
      out.push_back({base + ".weight", &c.weight, &c.wgrad});
      out.push_back({base + ".bias", &c.bias, &c.bgrad});
    };
    auto add_bn = [&](const std::string& base, BatchNorm2d<T>& b) {
      out.push_back({base + ".gamma", &b.gamma, &b.ggrad});
      out.push_back({base + ".beta", &b.beta, &b.bgrad});
    };
    for (size_t s = 0; s < enc_.size(); ++s) {
      const std::string base = "enc" + std::to_string(s);
      add_conv(base + ".conv1", enc_[s]->c1);
      add_bn(base + ".bn1", enc_[s]->b1);
      add_conv(base + ".conv2", enc_[s]->c2);
      add_bn(base + ".bn2", enc_[s]->b2);
    }
    add_conv("bottleneck.conv", *bott_conv_);
    add_bn("bottleneck.bn", *bott_bn_);
    for (size_t d = 0; d < dec_.size(); ++d) {
      const std::string base = "dec" + std::to_string(dec_.size() - 1 - d);
      add_conv(base + ".conv1", dec_[d]->c1);
      add_bn(base + ".bn1", dec_[d]->b1);
      add_conv(base + ".conv2", dec_[d]->c2);
      add_bn(base + ".bn2", dec_[d]->b2);
    }
    add_conv("head", *head_);
    return out;
  }

  std::vector<BufferRef<T>> buffers() {
    std::vector<BufferRef<T>> out;
    auto add_bn = [&](const std::string& base, BatchNorm2d<T>& b) {
      out.push_back({base + ".running_mean", &b.running_mean});
      out.push_back({base + ".running_var", &b.running_var});
    };
    for (size_t s = 0; s < enc_.size(); ++s) {
      const std::string base = "enc" + std::to_string(s);
      add_bn(base + ".bn1", enc_[s]->b1);
      add_bn(base + ".bn2", enc_[s]->b2);
    }
    add_bn("bottleneck.bn", *bott_bn_);
    for (size_t d = 0; d < dec_.size(); ++d) {
      const std::string base = "dec" + std::to_string(dec_.size() - 1 - d);
      add_bn(base + ".bn1", dec_[d]->b1);
      add_bn(base + ".bn2", dec_[d]->b2);
    }
    return out;
  }

  const NetworkConfig& config() const { return cfg_; }
  Dropout<T>& dropout() { return *bott_drop_; }

private:
  struct EncStage {
    EncStage(int in, int out)
        : c1(in, out, 3), b1(out), c2(out, out, 3), b2(out) {}
    Conv2d<T> c1;
    BatchNorm2d<T> b1;
    ReLU<T> r1;
    Conv2d<T> c2;
    BatchNorm2d<T> b2;
    ReLU<T> r2;
    MaxPool2<T> pool;
  };
  struct DecStage {
    DecStage(int in, int out)
        : c1(in, out, 3), b1(out), c2(out, out, 3), b2(out) {}
    UpsampleNearest2<T> up;
    Conv2d<T> c1;
    BatchNorm2d<T> b1;
    ReLU<T> r1;
    Conv2d<T> c2;
    BatchNorm2d<T> b2;
    ReLU<T> r2;
  };

  static Tensor<T> pad_replicate(const Tensor<T>& x, int multiple) {
    const int ph = (x.h + multiple - 1) / multiple * multiple;
    const int pw = (x.w + multiple - 1) / multiple * multiple;
    if (ph == x.h && pw == x.w) return x;
    Tensor<T> out(x.n, x.c, ph, pw);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.c; ++j) {
        const T* p = x.plane(i, j);
        T* q = out.plane(i, j);
        for (int y = 0; y < ph; ++y) {
          const int sy = y < x.h ? y : x.h - 1;
          for (int xx = 0; xx < pw; ++xx) {
            const int sx = xx < x.w ? xx : x.w - 1;
            q[static_cast<size_t>(y) * pw + xx] =
                p[static_cast<size_t>(sy) * x.w + sx];
          }
        }
      }
    return out;
  }

  static Tensor<T> crop(const Tensor<T>& x, int h, int w) {
    if (x.h == h && x.w == w) return x;
    Tensor<T> out(x.n, x.c, h, w);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.c; ++j)
        for (int y = 0; y < h; ++y)
          std::copy_n(x.plane(i, j) + static_cast<size_t>(y) * x.w, w,
                      out.plane(i, j) + static_cast<size_t>(y) * w);
    return out;
  }

  static Tensor<T> embed(const Tensor<T>& g, int h, int w) {
    if (g.h == h && g.w == w) return g;
    Tensor<T> out(g.n, g.c, h, w);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.c; ++j)
        for (int y = 0; y < g.h; ++y)
          std::copy_n(g.plane(i, j) + static_cast<size_t>(y) * g.w, g.w,
                      out.plane(i, j) + static_cast<size_t>(y) * w);
    return out;
  }

  static Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w)
      throw DataError("concat: spatial shape mismatch " + a.shape_str() +
                      " vs " + b.shape_str());
    Tensor<T> out(a.n, a.c + b.c, a.h, a.w);
    for (int i = 0; i < a.n; ++i) {
      for (int j = 0; j < a.c; ++j)
        std::copy_n(a.plane(i, j), a.plane_size(), out.plane(i, j));
      for (int j = 0; j < b.c; ++j)
        std::copy_n(b.plane(i, j), b.plane_size(), out.plane(i, a.c + j));
    }
    return out;
  }

  static std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& g,
                                                        int c0, int c1) {
    Tensor<T> a(g.n, c0, g.h, g.w), b(g.n, c1, g.h, g.w);
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < c0; ++j)
        std::copy_n(g.plane(i, j), g.plane_size(), a.plane(i, j));
      for (int j = 0; j < c1; ++j)
        std::copy_n(g.plane(i, c0 + j), g.plane_size(), b.plane(i, j));
    }
    return {std::move(a), std::move(b)};
  }

  static void add_into(Tensor<T>& dst, const Tensor<T>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst.v[i] = dst.v[i] + src.v[i];
  }

  NetworkConfig cfg_;
  std::vector<std::unique_ptr<EncStage>> enc_;
  std::unique_ptr<Conv2d<T>> bott_conv_;
  std::unique_ptr<BatchNorm2d<T>> bott_bn_;
  ReLU<T> bott_r_;
  std::unique_ptr<Dropout<T>> bott_drop_;
  std::vector<std::unique_ptr<DecStage>> dec_;
  std::unique_ptr<Conv2d<T>> head_;
  Sigmoid<T> head_sig_;

  std::vector<Tensor<T>> skips_;
  std::vector<Tensor<T>> skip_grads_;
  int orig_h_ = 0, orig_w_ = 0, padded_h_ = 0, padded_w_ = 0;
};

} // namespace lesionseg
