#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "v2v/errors.hpp"
#include "v2v/training.hpp"

namespace v2v::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json batch_json(const std::vector<FrameRef>& refs) {
    json out = json::array();
    for (const auto& r : refs) {
        out.push_back({r.clip, r.frame});
    }
    return out;
}

bool finite(const torch::Tensor& t) {
    return std::isfinite(t.item<double>());
}

void set_requires_grad(nn::ModelHandle& m, bool on) {
    for (auto& p : m.net()->parameters()) {
        p.set_requires_grad(on);
    }
}

std::string rng_state(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng rng_from_state(const std::string& s) {
    std::istringstream is(s);
    Rng rng;
    is >> rng;
    if (!is) {
        throw CorruptFileError("bad RNG state in checkpoint sidecar");
    }
    return rng;
}

void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

torch::Tensor stack_pool(const ImagePool& pool) {
    std::vector<torch::Tensor> items(pool.items().begin(), pool.items().end());
    return torch::stack(items);
}

}  // namespace

json LossReport::to_json() const {
    json j = {{"step", step},
              {"gen_adv_ab", gen_adv_ab},
              {"gen_adv_ba", gen_adv_ba},
              {"gan_ab", terms.gan_ab},
              {"gan_ba", terms.gan_ba},
              {"cycle", terms.cycle},
              {"d_a", d_a},
              {"d_b", d_b},
              {"objective", objective},
              {"wall_seconds", wall_seconds},
              {"batch_a", batch_json(batch.a)},
              {"batch_b", batch_json(batch.b)}};
    if (terms.constancy) {
        j["const"] = *terms.constancy;
    }
    return j;
}

std::vector<std::uint32_t> DomainData::depths() const {
    std::vector<std::uint32_t> out;
    for (const auto& c : clips) {
        out.push_back(static_cast<std::uint32_t>(c.size(0)));
    }
    return out;
}

DomainData load_domain(const DatasetManifest& m, Split split) {
    DomainData out;
    out.channels = m.shape.c;
    for (const auto* e : m.split(split)) {
        out.ids.push_back(e->id);
        out.clips.push_back(nn::frames_tensor(m.load(*e)));
    }
    if (out.clips.empty()) {
        throw DataError("manifest for domain '" + m.domain_name + "' has no " + to_string(split) + " clips");
    }
    return out;
}

CycleTrainer::CycleTrainer(TrainSetup setup, DomainData a, DomainData b)
    : setup_(std::move(setup)),
      a_(std::move(a)),
      b_(std::move(b)),
      sampler_(a_.depths(), b_.depths(), setup_.strategy, derive_seed(setup_.train.seed, "batches")),
      pool_a_(setup_.train.pool_size),
      pool_b_(setup_.train.pool_size),
      pool_rng_(derive_seed(setup_.train.seed, "pool")) {
    setup_.validate();
    if (a_.channels != setup_.channels_a || b_.channels != setup_.channels_b) {
        throw ConfigError("domain channel counts do not match the training setup");
    }
    const auto h = a_.clips.front().size(2), w = a_.clips.front().size(3);
    for (const auto* dom : {&a_, &b_}) {
        for (const auto& c : dom->clips) {
            if (c.size(2) != h || c.size(3) != w) {
                throw DataError("training clips must share one frame size");
            }
        }
    }
    setup_.generator_ab().validate_input(setup_.strategy.depth, h, w);

    const std::uint64_t seed = setup_.train.seed;
    g_ab_ = nn::build_generator(setup_.generator_ab());
    g_ba_ = nn::build_generator(setup_.generator_ba());
    d_a_ = nn::build_discriminator(setup_.discriminator_a());
    d_b_ = nn::build_discriminator(setup_.discriminator_b());
    nn::init_weights(g_ab_, derive_seed(seed, "init-G_AB"));
    nn::init_weights(g_ba_, derive_seed(seed, "init-G_BA"));
    nn::init_weights(d_a_, derive_seed(seed, "init-D_A"));
    nn::init_weights(d_b_, derive_seed(seed, "init-D_B"));
    for (const auto* m : {&g_ab_, &g_ba_, &d_a_, &d_b_}) {
        init_checksum_ = splitmix64(init_checksum_ ^ nn::parameter_checksum(*m));
    }

    // Probe the discriminator contract once so a too-small input fails early.
    {
        torch::NoGradGuard guard;
        const auto [ra, rb] = assemble(sampler_.batch(0, 0));
        d_a_.forward(ra);
        d_b_.forward(rb);
    }

    const auto& tc = setup_.train;
    auto opts = torch::optim::AdamOptions(tc.learning_rate).betas({tc.beta1, tc.beta2});
    std::vector<torch::Tensor> g_params = g_ab_.net()->parameters();
    for (const auto& p : g_ba_.net()->parameters()) {
        g_params.push_back(p);
    }
    opt_g_ = std::make_unique<torch::optim::Adam>(g_params, opts);
    opt_d_a_ = std::make_unique<torch::optim::Adam>(d_a_.net()->parameters(), opts);
    opt_d_b_ = std::make_unique<torch::optim::Adam>(d_b_.net()->parameters(), opts);
}

std::pair<torch::Tensor, torch::Tensor> CycleTrainer::assemble(const BatchSpec& spec) const {
    auto gather = [&](const DomainData& dom, const std::vector<FrameRef>& refs) {
        std::vector<torch::Tensor> frames;
        frames.reserve(refs.size());
        for (const auto& r : refs) {
            frames.push_back(dom.clips.at(r.clip)[r.frame]);
        }
        torch::Tensor t = torch::stack(frames);  // [m, c, h, w]
        if (setup_.strategy.is_3d()) {
            t = t.permute({1, 0, 2, 3}).unsqueeze(0).contiguous();
        }
        return t;
    };
    return {gather(a_, spec.a), gather(b_, spec.b)};
}

LossReport CycleTrainer::advance() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::int64_t s = step_ + 1;
    const auto& tc = setup_.train;
    LossReport rep;
    rep.step = s;
    rep.batch = sampler_.batch(0, static_cast<std::uint64_t>(s));
    const auto [real_a, real_b] = assemble(rep.batch);

    // Generator update with both discriminators frozen.
    set_requires_grad(d_a_, false);
    set_requires_grad(d_b_, false);
    const torch::Tensor fake_b = g_ab_.forward(real_a);
    const torch::Tensor rec_a = g_ba_.forward(fake_b);
    const torch::Tensor fake_a = g_ba_.forward(real_b);
    const torch::Tensor rec_b = g_ab_.forward(fake_a);
    const torch::Tensor adv_ab = generator_adversarial_loss(d_b_.forward(fake_b), tc.form);
    const torch::Tensor adv_ba = generator_adversarial_loss(d_a_.forward(fake_a), tc.form);
    const torch::Tensor cyc = cycle_loss(real_a, rec_a, real_b, rec_b);
    torch::Tensor loss_g = adv_ab + adv_ba + tc.gamma * cyc;
    torch::Tensor cst;
    if (setup_.strategy.uses_const()) {
        cst = const_loss(fake_b, !tc.const_unnormalized) + const_loss(fake_a, !tc.const_unnormalized);
        loss_g = loss_g + tc.lambda_const * cst;
    }
    if (!finite(loss_g)) {
        throw NumericError("non-finite generator loss", s);
    }
    opt_g_->zero_grad();
    loss_g.backward();
    opt_g_->step();
    set_requires_grad(d_a_, true);
    set_requires_grad(d_b_, true);

    // One step each for D_B and D_A on pooled fakes.
    const torch::Tensor pooled_b = pool_b_.query(fake_b.detach(), pool_rng_);
    const torch::Tensor gan_ab = adversarial_loss(d_b_.forward(real_b), d_b_.forward(pooled_b), tc.form);
    opt_d_b_->zero_grad();
    (-gan_ab).backward();
    opt_d_b_->step();

    const torch::Tensor pooled_a = pool_a_.query(fake_a.detach(), pool_rng_);
    const torch::Tensor gan_ba = adversarial_loss(d_a_.forward(real_a), d_a_.forward(pooled_a), tc.form);
    opt_d_a_->zero_grad();
    (-gan_ba).backward();
    opt_d_a_->step();

    if (!finite(gan_ab) || !finite(gan_ba)) {
        throw NumericError("non-finite discriminator loss", s);
    }

    rep.gen_adv_ab = adv_ab.item<double>();
    rep.gen_adv_ba = adv_ba.item<double>();
    rep.terms.gan_ab = gan_ab.item<double>();
    rep.terms.gan_ba = gan_ba.item<double>();
    rep.terms.cycle = cyc.item<double>();
    if (cst.defined()) {
        rep.terms.constancy = cst.item<double>();
    }
    rep.d_a = -rep.terms.gan_ba;
    rep.d_b = -rep.terms.gan_ab;
    rep.objective = total_objective(rep.terms, tc.gamma, tc.lambda_const);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    step_ = s;
    return rep;
}

void CycleTrainer::save_checkpoint(const fs::path& path) const {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    torch::serialize::OutputArchive root;
    auto put_model = [&](const char* key, const nn::ModelHandle& m) {
        torch::serialize::OutputArchive sub;
        m.save_to(sub);
        root.write(key, sub);
    };
    auto put_opt = [&](const char* key, const torch::optim::Optimizer& o) {
        torch::serialize::OutputArchive sub;
        o.save(sub);
        root.write(key, sub);
    };
    put_model("G_AB", g_ab_);
    put_model("G_BA", g_ba_);
    put_model("D_A", d_a_);
    put_model("D_B", d_b_);
    put_opt("opt_G", *opt_g_);
    put_opt("opt_D_A", *opt_d_a_);
    put_opt("opt_D_B", *opt_d_b_);
    if (pool_a_.size() > 0) {
        root.write("pool_A", stack_pool(pool_a_));
    }
    if (pool_b_.size() > 0) {
        root.write("pool_B", stack_pool(pool_b_));
    }
    const fs::path tmp = path.string() + ".tmp";
    root.save_to(tmp.string());
    fs::rename(tmp, path);

    const json meta = {{"format", "v2v-checkpoint"},
                       {"version", 1},
                       {"blob", path.filename().string()},
                       {"step", step_},
                       {"setup", to_json(setup_)},
                       {"param_counts",
                        {{"G_AB", g_ab_.parameter_count()},
                         {"G_BA", g_ba_.parameter_count()},
                         {"D_A", d_a_.parameter_count()},
                         {"D_B", d_b_.parameter_count()}}},
                       {"init_checksum", init_checksum_},
                       {"rng_state", {{"pool", rng_state(pool_rng_)}}},
                       {"pool_sizes", {{"A", pool_a_.size()}, {"B", pool_b_.size()}}},
                       {"train_ids", {{"A", a_.ids}, {"B", b_.ids}}}};
    write_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");
}

CheckpointMeta read_checkpoint_meta(const fs::path& checkpoint) {
    const fs::path meta_path = checkpoint.string() + ".meta.json";
    std::ifstream in(meta_path);
    if (!in) {
        throw DataError("missing checkpoint sidecar " + meta_path.string());
    }
    CheckpointMeta out;
    try {
        in >> out.raw;
    } catch (const json::exception& e) {
        throw CorruptFileError("bad checkpoint sidecar " + meta_path.string() + ": " + e.what());
    }
    if (out.raw.value("format", "") != "v2v-checkpoint") {
        throw FormatError(meta_path.string() + " is not a training checkpoint sidecar");
    }
    if (out.raw.value("version", 0) != 1) {
        throw FormatError("unsupported checkpoint version in " + meta_path.string());
    }
    try {
        out.setup = train_setup_from_json(out.raw.at("setup"));
        out.step = out.raw.at("step").get<std::int64_t>();
        out.train_ids_a = out.raw.at("train_ids").at("A").get<std::vector<std::string>>();
        out.train_ids_b = out.raw.at("train_ids").at("B").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw CorruptFileError("incomplete checkpoint sidecar " + meta_path.string() + ": " + e.what());
    }
    return out;
}

void CycleTrainer::load_checkpoint(const fs::path& path) {
    const CheckpointMeta meta = read_checkpoint_meta(path);
    if (to_json(meta.setup) != to_json(setup_)) {
        // Only the step budget may change on resume.
        TrainSetup a = meta.setup, b = setup_;
        a.train.steps = b.train.steps = 0;
        a.train.checkpoint_every = b.train.checkpoint_every = 0;
        if (to_json(a) != to_json(b)) {
            throw ConfigError("checkpoint " + path.string() + " was trained with a different setup");
        }
    }
    if (meta.train_ids_a != a_.ids || meta.train_ids_b != b_.ids) {
        throw DataError("checkpoint " + path.string() + " was trained on different clips");
    }
    if (!fs::exists(path)) {
        throw DataError("missing checkpoint blob " + path.string());
    }
    try {
        torch::serialize::InputArchive root;
        root.load_from(path.string());
        auto get_model = [&](const char* key, nn::ModelHandle& m) {
            torch::serialize::InputArchive sub;
            root.read(key, sub);
            m.load_from(sub);
        };
        auto get_opt = [&](const char* key, torch::optim::Optimizer& o) {
            torch::serialize::InputArchive sub;
            root.read(key, sub);
            o.load(sub);
        };
        get_model("G_AB", g_ab_);
        get_model("G_BA", g_ba_);
        get_model("D_A", d_a_);
        get_model("D_B", d_b_);
        get_opt("opt_G", *opt_g_);
        get_opt("opt_D_A", *opt_d_a_);
        get_opt("opt_D_B", *opt_d_b_);
        auto get_pool = [&](const char* key, const char* side, ImagePool& pool) {
            const auto n = meta.raw.at("pool_sizes").at(side).get<std::size_t>();
            std::vector<torch::Tensor> items;
            if (n > 0) {
                torch::Tensor t;
                root.read(key, t);
                for (std::int64_t i = 0; i < t.size(0); ++i) {
                    items.push_back(t[i].clone());
                }
            }
            if (items.size() != n) {
                throw CorruptFileError("pool size mismatch in checkpoint");
            }
            pool.restore(std::move(items));
        };
        get_pool("pool_A", "A", pool_a_);
        get_pool("pool_B", "B", pool_b_);
    } catch (const c10::Error& e) {
        throw CorruptFileError("cannot load checkpoint " + path.string() + ": " + e.what_without_backtrace());
    }
    pool_rng_ = rng_from_state(meta.raw.at("rng_state").at("pool").get<std::string>());
    init_checksum_ = meta.raw.value("init_checksum", std::uint64_t{0});
    step_ = meta.step;
}

fs::path checkpoint_path(const fs::path& out_dir, std::int64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_%06lld.pt", static_cast<long long>(step));
    return out_dir / "checkpoints" / buf;
}

TrainResult train(const TrainSetup& setup_in, const DatasetManifest& a, const DatasetManifest& b,
                  const fs::path& out_dir, const std::optional<fs::path>& resume, const ProgressFn& progress) {
    TrainSetup setup = setup_in;
    setup.channels_a = a.shape.c;
    setup.channels_b = b.shape.c;
    setup.validate();
    check_splits_disjoint(a);
    check_splits_disjoint(b);

    CycleTrainer trainer(setup, load_domain(a), load_domain(b));
    if (resume) {
        trainer.load_checkpoint(*resume);
        if (trainer.step() > setup.train.steps) {
            throw ConfigError("checkpoint step " + std::to_string(trainer.step()) + " is past the step budget");
        }
    }
    fs::create_directories(out_dir / "checkpoints");
    std::ofstream log(out_dir / "log.jsonl", resume ? std::ios::app : std::ios::trunc);
    if (!log) {
        throw DataError("cannot open " + (out_dir / "log.jsonl").string());
    }

    TrainResult result;
    result.init_checksum = trainer.init_checksum();
    const auto& tc = setup.train;
    while (trainer.step() < tc.steps) {
        LossReport rep;
        try {
            rep = trainer.advance();
        } catch (const NumericError& e) {
            log << json{{"event", "abort"}, {"step", e.step()}, {"error", e.what()}}.dump() << "\n";
            log.flush();
            throw;
        }
        if (rep.step % tc.log_every == 0 || rep.step == tc.steps) {
            log << rep.to_json().dump() << "\n";
            log.flush();
        }
        if (progress) {
            progress(rep);
        }
        const bool last = rep.step == tc.steps;
        if (last || (tc.checkpoint_every > 0 && rep.step % tc.checkpoint_every == 0)) {
            const fs::path p = checkpoint_path(out_dir, rep.step);
            trainer.save_checkpoint(p);
            result.final_checkpoint = p;
        }
        result.reports.push_back(std::move(rep));
    }
    if (result.final_checkpoint.empty()) {
        // Resumed at the final step: the checkpoint already exists.
        result.final_checkpoint = checkpoint_path(out_dir, trainer.step());
        if (!fs::exists(result.final_checkpoint)) {
            trainer.save_checkpoint(result.final_checkpoint);
        }
    }
    return result;
}

}  // namespace v2v::train
