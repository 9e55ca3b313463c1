#include "spamnet/model.hpp"

#include <cstring>
#include <fstream>
#include <utility>

namespace spamnet {

SpamNet::SpamNet(Rng& rng, float dropout_rate)
    : conv1(rng, 3, 32, Padding::same),
      conv2(rng, 32, 32, Padding::valid),
      conv3(rng, 32, 64, Padding::same),
      conv4(rng, 64, 64, Padding::valid),
      act1(Act::relu),
      act2(Act::relu),
      act3(Act::relu),
      act4(Act::relu),
      act5(Act::relu),
      drop1(dropout_rate),
      drop2(dropout_rate),
      drop3(dropout_rate),
      fc1(rng, 9216, 128),
      fc2(rng, 128, 1),
      out_act(Act::sigmoid) {}

SpamNet build_spamnet(Rng& rng, float dropout_rate) {
    return SpamNet(rng, dropout_rate);
}

void SpamNet::set_training(bool on) {
    training_ = on;
    drop1.set_training(on);
    drop2.set_training(on);
    drop3.set_training(on);
}

Tensor SpamNet::forward(const Tensor& x, Rng& rng) {
    if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != 56 || x.dim(3) != 56)
        throw std::invalid_argument("forward expects [N,3,56,56], got " +
                                    shape_str(x.shape()));
    layer_shapes_.clear();
    auto step = [this](Tensor t) {
        layer_shapes_.push_back(t.shape());
        return t;
    };
    Tensor a = step(conv1.forward(x));
    a = step(act1.forward(a));
    a = step(conv2.forward(a));
    a = step(act2.forward(a));
    a = step(pool1.forward(a));
    a = step(drop1.forward(a, rng));
    a = step(conv3.forward(a));
    a = step(act3.forward(a));
    a = step(conv4.forward(a));
    a = step(act4.forward(a));
    a = step(pool2.forward(a));
    a = step(drop2.forward(a, rng));
    pre_flatten_ = a.shape();
    const std::size_t flat = a.size() / a.dim(0);
    a = step(reshape(a, {a.dim(0), flat}));
    a = step(fc1.forward(a));
    a = step(act5.forward(a));
    a = step(drop3.forward(a, rng));
    a = step(fc2.forward(a));
    a = step(out_act.forward(a));
    return a;
}

Tensor SpamNet::backward(const Tensor& grad_out) {
    Tensor g = out_act.backward(grad_out);
    g = fc2.backward(g);
    g = drop3.backward(g);
    g = act5.backward(g);
    g = fc1.backward(g);
    g = reshape(g, pre_flatten_);
    g = drop2.backward(g);
    g = pool2.backward(g);
    g = act4.backward(g);
    g = conv4.backward(g);
    g = act3.backward(g);
    g = conv3.backward(g);
    g = drop1.backward(g);
    g = pool1.backward(g);
    g = act2.backward(g);
    g = conv2.backward(g);
    g = act1.backward(g);
    return conv1.backward(g);
}

std::vector<Tensor*> SpamNet::params() {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &conv3.weights, &conv3.bias, &conv4.weights, &conv4.bias,
            &fc1.weights,   &fc1.bias,   &fc2.weights,   &fc2.bias};
}

std::vector<const Tensor*> SpamNet::grads() const {
    return {&conv1.grad_weights, &conv1.grad_bias, &conv2.grad_weights,
            &conv2.grad_bias,    &conv3.grad_weights, &conv3.grad_bias,
            &conv4.grad_weights, &conv4.grad_bias,    &fc1.grad_weights,
            &fc1.grad_bias,      &fc2.grad_weights,   &fc2.grad_bias};
}

std::size_t SpamNet::param_count() const {
    std::size_t n = 0;
    for (const Tensor* t : const_cast<SpamNet*>(this)->params()) n += t->size();
    return n;
}

StepResult train_step_ex(SpamNet& net, const Tensor& images,
                         const Tensor& labels, AdamState& adam, Rng& rng) {
    if (!net.training())
        throw std::logic_error("train_step: network is in eval mode");
    Tensor probs = net.forward(images, rng);
    BceResult bce = bce_loss(probs, labels);
    net.backward(bce.grad);
    adam_step(adam, net.params(), net.grads());
    return {bce.loss, std::move(probs)};
}

float train_step(SpamNet& net, const Tensor& images, const Tensor& labels,
                 AdamState& adam, Rng& rng) {
    return train_step_ex(net, images, labels, adam, rng).loss;
}

std::vector<TrainLogEntry> fit(SpamNet& net, const Dataset& train_set,
                               const TrainConfig& config, AdamState& adam) {
    if (train_set.samples.empty())
        throw std::invalid_argument("fit: empty training set");
    if (config.batch_size == 0 || config.epochs == 0)
        throw std::invalid_argument("fit: batch_size and epochs must be >= 1");

    net.set_training(true);
    Rng rng(config.seed);
    std::vector<TrainLogEntry> log;
    log.reserve(config.epochs);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t correct = 0, total = 0;
        for (Batch& batch : batches(train_set, config.batch_size, rng)) {
            StepResult r = train_step_ex(net, batch.images, batch.labels, adam, rng);
            const std::size_t b = batch.labels.size();
            loss_sum += static_cast<double>(r.loss) * static_cast<double>(b);
            for (std::size_t k = 0; k < b; ++k) {
                const int pred = r.probs[k] >= 0.5f ? 1 : 0;
                if (pred == static_cast<int>(batch.labels[k])) ++correct;
            }
            total += b;
        }
        log.push_back({epoch, static_cast<float>(loss_sum / static_cast<double>(total)),
                       static_cast<float>(correct) / static_cast<float>(total)});
        if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() &&
            epoch % config.checkpoint_every == 0)
            save_checkpoint(net, &adam, epoch, config.seed, config.checkpoint_path);
    }
    return log;
}

Prediction predict(SpamNet& net, const Tensor& images, float threshold) {
    net.set_training(false);
    Rng unused(0);
    Tensor probs = net.forward(images, unused);
    Prediction out{std::move(probs), {}};
    out.labels.reserve(out.probs.size());
    for (std::size_t i = 0; i < out.probs.size(); ++i)
        out.labels.push_back(out.probs[i] >= threshold ? 1 : 0);
    return out;
}

// ---- checkpoint serialization ----

namespace {

constexpr char kMagic[4] = {'D', 'I', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

const char* const kParamNames[12] = {
    "conv2d_1.weight", "conv2d_1.bias", "conv2d_2.weight", "conv2d_2.bias",
    "conv2d_3.weight", "conv2d_3.bias", "conv2d_4.weight", "conv2d_4.bias",
    "dense_1.weight",  "dense_1.bias",  "dense_2.weight",  "dense_2.bias",
};

void put_u16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xFF));
    b.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& b, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(b, u);
}

void put_tensor(std::string& b, const std::string& name, const Tensor& t) {
    put_u16(b, static_cast<std::uint16_t>(name.size()));
    b += name;
    b.push_back(static_cast<char>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(b, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size(); ++i) put_f32(b, t[i]);
}

// 64-bit values are stored exactly as four 16-bit chunks, low first
Tensor u64_tensor(std::uint64_t v) {
    Tensor t({4});
    for (int i = 0; i < 4; ++i)
        t[i] = static_cast<float>((v >> (16 * i)) & 0xFFFF);
    return t;
}

std::uint64_t u64_from(const Tensor& t) {
    std::uint64_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t[i])) << (16 * i);
    return v;
}

struct Reader {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t pos = 0;

    void need(std::size_t k) const {
        if (n - pos < k)
            throw CheckpointError(CheckpointErrorKind::truncated,
                                  "checkpoint file ends mid-record");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[pos] | (p[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        const std::uint32_t u = u32();
        float v;
        std::memcpy(&v, &u, 4);
        return v;
    }
    std::string str(std::size_t k) {
        need(k);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

}  // namespace

void save_checkpoint(const SpamNet& net, const AdamState* adam,
                     std::uint64_t epoch, std::uint64_t seed,
                     const std::string& path) {
    SpamNet& mut = const_cast<SpamNet&>(net);
    const std::vector<Tensor*> params = mut.params();

    const bool with_adam = adam != nullptr && !adam->m.empty();
    if (with_adam && adam->m.size() != params.size())
        throw std::invalid_argument("save_checkpoint: optimizer state does not match the network");

    std::string body;
    std::uint32_t count = 12 + 2 + (with_adam ? 2 + 24 : 0);
    body.append(kMagic, 4);
    put_u32(body, kVersion);
    put_u32(body, count);

    for (int i = 0; i < 12; ++i) put_tensor(body, kParamNames[i], *params[i]);
    put_tensor(body, "train.epoch", u64_tensor(epoch));
    put_tensor(body, "train.seed", u64_tensor(seed));
    if (with_adam) {
        Tensor hyper({4}, {adam->lr, adam->beta1, adam->beta2, adam->eps});
        put_tensor(body, "adam.hyper", hyper);
        put_tensor(body, "adam.t", u64_tensor(adam->t));
        for (int i = 0; i < 12; ++i)
            put_tensor(body, std::string("adam.m.") + kParamNames[i], adam->m[i]);
        for (int i = 0; i < 12; ++i)
            put_tensor(body, std::string("adam.v.") + kParamNames[i], adam->v[i]);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "cannot write " + path);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "short write to " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointErrorKind::io, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    Reader r{bytes.data(), bytes.size()};
    if (r.str(4) != std::string(kMagic, 4))
        throw CheckpointError(CheckpointErrorKind::bad_magic,
                              "not a checkpoint file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError(CheckpointErrorKind::version_mismatch,
                              "checkpoint version " + std::to_string(version) +
                                  ", expected " + std::to_string(kVersion));
    const std::uint32_t count = r.u32();

    std::vector<std::pair<std::string, Tensor>> entries;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint16_t name_len = r.u16();
        std::string name = r.str(name_len);
        r.need(1);
        const std::size_t rank = r.p[r.pos++];
        if (rank == 0 || rank > 8)
            throw CheckpointError(CheckpointErrorKind::inconsistent,
                                  "tensor '" + name + "' has rank " + std::to_string(rank));
        Shape shape(rank);
        std::size_t numel = 1;
        for (std::size_t d = 0; d < rank; ++d) {
            shape[d] = r.u32();
            if (shape[d] == 0)
                throw CheckpointError(CheckpointErrorKind::inconsistent,
                                      "tensor '" + name + "' has a zero dimension");
            numel *= shape[d];
            if (numel > (1u << 27))
                throw CheckpointError(CheckpointErrorKind::inconsistent,
                                      "tensor '" + name + "' is implausibly large");
        }
        std::vector<float> data(numel);
        for (std::size_t i = 0; i < numel; ++i) data[i] = r.f32();
        entries.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    if (r.pos != r.n)
        throw CheckpointError(CheckpointErrorKind::inconsistent,
                              "trailing bytes after the declared tensor table");

    auto find = [&](const std::string& name) -> Tensor* {
        for (auto& [n, t] : entries)
            if (n == name) return &t;
        return nullptr;
    };

    Rng scratch(0);
    LoadedCheckpoint out{SpamNet(scratch), AdamState{}, false, 0, 0};
    const std::vector<Tensor*> params = out.net.params();
    std::size_t used = 0;

    for (int i = 0; i < 12; ++i) {
        Tensor* t = find(kParamNames[i]);
        if (t == nullptr)
            throw CheckpointError(CheckpointErrorKind::inconsistent,
                                  std::string("missing tensor '") + kParamNames[i] + "'");
        if (!same_shape(t->shape(), params[i]->shape()))
            throw CheckpointError(CheckpointErrorKind::inconsistent,
                                  std::string("tensor '") + kParamNames[i] + "' has shape " +
                                      shape_str(t->shape()) + ", expected " +
                                      shape_str(params[i]->shape()));
        *params[i] = std::move(*t);
        ++used;
    }

    Tensor* epoch_t = find("train.epoch");
    Tensor* seed_t = find("train.seed");
    if (epoch_t == nullptr || seed_t == nullptr || epoch_t->size() != 4 ||
        seed_t->size() != 4)
        throw CheckpointError(CheckpointErrorKind::inconsistent,
                              "missing or malformed train.epoch / train.seed");
    out.epoch = u64_from(*epoch_t);
    out.seed = u64_from(*seed_t);
    used += 2;

    if (Tensor* hyper = find("adam.hyper")) {
        Tensor* t_t = find("adam.t");
        if (hyper->size() != 4 || t_t == nullptr || t_t->size() != 4)
            throw CheckpointError(CheckpointErrorKind::inconsistent,
                                  "malformed adam.hyper / adam.t");
        out.adam.lr = (*hyper)[0];
        out.adam.beta1 = (*hyper)[1];
        out.adam.beta2 = (*hyper)[2];
        out.adam.eps = (*hyper)[3];
        out.adam.t = u64_from(*t_t);
        used += 2;
        for (int i = 0; i < 12; ++i) {
            Tensor* m = find(std::string("adam.m.") + kParamNames[i]);
            Tensor* v = find(std::string("adam.v.") + kParamNames[i]);
            if (m == nullptr || v == nullptr ||
                !same_shape(m->shape(), params[i]->shape()) ||
                !same_shape(v->shape(), params[i]->shape()))
                throw CheckpointError(CheckpointErrorKind::inconsistent,
                                      std::string("missing or misshapen moments for '") +
                                          kParamNames[i] + "'");
            out.adam.m.push_back(std::move(*m));
            out.adam.v.push_back(std::move(*v));
            used += 2;
        }
        out.has_adam = true;
    }

    if (used != entries.size())
        throw CheckpointError(CheckpointErrorKind::inconsistent,
                              "checkpoint contains unrecognized tensors");
    out.net.set_training(false);
    return out;
}

}  // namespace spamnet
