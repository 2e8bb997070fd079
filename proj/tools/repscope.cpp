// repscope command-line driver. Run `repscope <command> --help` for flags;
// docs/cli.md lists every command with an example.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repscope/cam.hpp"
#include "repscope/error.hpp"
#include "repscope/net.hpp"
#include "repscope/parallel.hpp"
#include "repscope/patterns.hpp"
#include "repscope/rdm.hpp"
#include "repscope/report.hpp"
#include "repscope/stats.hpp"
#include "repscope/tensorio.hpp"

namespace fs = std::filesystem;
using namespace repscope;

namespace {

std::optional<io::Split> split_arg(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    const auto sp = io::parse_split(s);
    if (!sp) {
        fail(Errc::BadArgument, "unknown split '" + s + "'");
    }
    return sp;
}

io::DatasetManifest manifest_arg(const fs::path& path, const std::string& split, bool validate = false) {
    auto m = io::load_manifest(path, {validate});
    if (const auto sp = split_arg(split)) {
        return m.filtered(*sp);
    }
    return m;
}

// Keeps the traces whose image is listed in the manifest, in manifest order.
std::vector<net::ForwardTrace> traces_for(std::vector<net::ForwardTrace> all, const io::DatasetManifest& m) {
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < all.size(); ++i) {
        by_id.emplace(all[i].image_id, i);
    }
    std::vector<net::ForwardTrace> out;
    for (const auto& r : m.records()) {
        const auto it = by_id.find(r.image_id);
        if (it == by_id.end()) {
            fail(Errc::UnknownImage, "no trace for image '" + r.image_id + "'");
        }
        out.push_back(std::move(all[it->second]));
    }
    return out;
}

void say(const std::string& line) {
    std::cout << line << '\n';
}

// --- forward --------------------------------------------------------------------

struct ForwardArgs {
    fs::path net, manifest, out;
    std::string split;
};

void run_forward(const ForwardArgs& a) {
    const auto spec = net::load_network_spec(a.net);
    const auto m = manifest_arg(a.manifest, a.split, true);
    std::vector<Tensor> images(m.size());
    std::vector<std::string> ids(m.size());
    parallel_for(m.size(), [&](std::size_t i) {
        images[i] = io::read_tensor(m.resolve(m.records()[i]));
        ids[i] = m.records()[i].image_id;
    });
    const auto traces = net::forward_batch(spec, images, ids);
    net::save_traces(traces, a.out);
    say("forward: " + std::to_string(traces.size()) + " images, " + std::to_string(spec.tap_points.size()) +
        " taps -> " + a.out.string());
}

// --- patterns -------------------------------------------------------------------

struct PatternArgs {
    fs::path traces, manifest, out;
    std::string split;
    double fraction = 0.8;
    std::string mode = "top";
};

void run_patterns(const PatternArgs& a) {
    patterns::AnalysisConfig cfg;
    cfg.fraction = a.fraction;
    if (a.mode == "top") {
        cfg.mode = patterns::FractionMode::TopFractionMean;
    } else if (a.mode == "scaled") {
        cfg.mode = patterns::FractionMode::ScaledMean;
    } else {
        fail(Errc::BadArgument, "mode must be top or scaled");
    }
    cfg.validate();
    const auto m = manifest_arg(a.manifest, a.split);
    const auto traces = traces_for(net::load_traces(a.traces), m);
    const auto vectors = patterns::build_response_vectors(traces, cfg);
    const auto thresholds = patterns::class_thresholds(vectors, m);
    const auto pats = patterns::apply_thresholds(vectors, thresholds, m, cfg);
    const auto sets = patterns::group_by_layer(vectors, pats);
    patterns::save_pattern_dir(sets, thresholds, a.out);
    say("patterns: " + std::to_string(sets.size()) + " layers -> " + a.out.string());
}

// --- stats ----------------------------------------------------------------------

struct StatsArgs {
    fs::path patterns;
    std::string layer;
    bool per_image = false;
    bool per_neuron = false;
    std::optional<std::size_t> neuron;
    std::optional<int> klass;
    std::size_t bins = 50;
    fs::path out;
};

void run_stats(const StatsArgs& a) {
    const auto set = patterns::load_layer_patterns(a.patterns, a.layer);
    const int modes = (a.per_image ? 1 : 0) + (a.per_neuron ? 1 : 0) + (a.neuron ? 1 : 0);
    if (modes != 1) {
        fail(Errc::BadArgument, "choose exactly one of --per-image, --per-neuron, --neuron");
    }
    stats::Histogram h;
    if (a.per_image) {
        h = stats::activated_per_image(set.patterns, a.layer, a.klass);
    } else if (a.per_neuron) {
        h = stats::images_per_neuron(set.patterns, a.layer, a.klass);
    } else {
        if (!a.klass) {
            fail(Errc::BadArgument, "--neuron needs --class");
        }
        std::vector<int> class_of;
        for (const auto& p : set.patterns) {
            class_of.push_back(p.class_id);
        }
        h = stats::neuron_response_histogram(set.responses, class_of, *a.neuron, *a.klass, a.layer, a.bins);
    }
    const auto table = stats::histogram_table(h);
    if (a.out.empty()) {
        std::cout << report::format_table(table);
    } else {
        report::write_table(table, a.out);
    }
}

// --- rdm ------------------------------------------------------------------------

struct RdmBuildArgs {
    fs::path patterns, out, subset;
    std::string layer;
    bool rank = false;
};

void run_rdm_build(const RdmBuildArgs& a) {
    auto set = patterns::load_layer_patterns(a.patterns, a.layer);
    std::vector<patterns::ActivityPattern> pats = std::move(set.patterns);
    if (!a.subset.empty()) {
        const auto sub = io::load_manifest(a.subset);
        std::map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < pats.size(); ++i) {
            by_id.emplace(pats[i].image_id, i);
        }
        std::vector<patterns::ActivityPattern> picked;
        for (const auto& r : sub.records()) {
            const auto it = by_id.find(r.image_id);
            if (it == by_id.end()) {
                fail(Errc::UnknownImage, "subset image '" + r.image_id + "' has no pattern at '" + a.layer + "'");
            }
            picked.push_back(pats[it->second]);
        }
        pats = std::move(picked);
    }
    auto r = rdm::build_rdm(pats);
    if (!r.degenerate_pairs.empty()) {
        std::cerr << "rdm build: " << r.degenerate_pairs.size()
                  << " pairs involve a constant pattern and were set to 1\n";
    }
    if (a.rank) {
        r = rdm::rank_transform(r);
    }
    rdm::save_rdm(r, a.out);
    const auto sep = rdm::intra_inter(r);
    say("rdm build: n=" + std::to_string(r.size()) + " intra=" + report::format_real(sep.intra_mean) +
        " inter=" + report::format_real(sep.inter_mean));
}

struct RdmRankArgs {
    fs::path in, out;
};

void run_rdm_rank(const RdmRankArgs& a) {
    rdm::save_rdm(rdm::rank_transform(rdm::load_rdm(a.in)), a.out);
}

struct RdmCompareArgs {
    std::vector<std::string> in;
    std::vector<std::string> names;
    std::string method = "pearson";
    std::size_t dim = 2;
    fs::path out;
};

std::vector<rdm::Rdm> load_rdms(const RdmCompareArgs& a, std::vector<std::string>& names) {
    if (a.in.size() < 2) {
        fail(Errc::BadArgument, "need at least two RDMs");
    }
    if (!a.names.empty() && a.names.size() != a.in.size()) {
        fail(Errc::BadArgument, "--name must be given once per --in");
    }
    std::vector<rdm::Rdm> rdms;
    for (std::size_t i = 0; i < a.in.size(); ++i) {
        rdms.push_back(rdm::load_rdm(a.in[i]));
        names.push_back(a.names.empty() ? fs::path(a.in[i]).filename().string() : a.names[i]);
    }
    return rdms;
}

void run_rdm_corr(const RdmCompareArgs& a) {
    std::vector<std::string> names;
    const auto rdms = load_rdms(a, names);
    const auto method = rdm::parse_method(a.method);
    report::Table t{{"a", "b", "correlation"}, {}};
    for (std::size_t p = 0; p < rdms.size(); ++p) {
        for (std::size_t q = p + 1; q < rdms.size(); ++q) {
            t.rows.push_back({names[p], names[q], report::format_real(rdm::rdm_correlation(rdms[p], rdms[q], method))});
        }
    }
    if (a.out.empty()) {
        std::cout << report::format_table(t);
    } else {
        report::write_table(t, a.out);
    }
}

void run_rdm_mds(const RdmCompareArgs& a) {
    std::vector<std::string> names;
    const auto rdms = load_rdms(a, names);
    const auto method = rdm::parse_method(a.method);
    const Matrix d = rdm::rdm_distance_matrix(rdms, method);
    const auto e = rdm::classical_mds(d, a.dim, names);
    if (a.out.empty()) {
        fail(Errc::BadArgument, "--out is required");
    }
    rdm::write_embedding(e, a.out);
    say("rdm mds: fit correlation " + report::format_real(rdm::mds_fit_correlation(d, e, method)));
}

// --- subsets --------------------------------------------------------------------

struct SubsetArgs {
    fs::path manifest, confidences, out;
    std::string split;
    std::size_t groups = 12;
    std::size_t per_group = 12;
    bool allow_short = false;
};

std::map<std::string, double> read_confidences(const fs::path& path) {
    const auto t = report::read_table(path);
    const std::size_t id_col = t.column("image_id");
    const std::size_t c_col = t.column("confidence");
    std::map<std::string, double> out;
    for (const auto& row : t.rows) {
        if (!out.emplace(row.at(id_col), report::parse_real(row.at(c_col))).second) {
            fail(Errc::DuplicateId, "confidence listed twice for '" + row.at(id_col) + "'");
        }
    }
    return out;
}

void run_subsets(const SubsetArgs& a) {
    const auto m = manifest_arg(a.manifest, a.split);
    const auto subsets = rdm::build_subsets(m, read_confidences(a.confidences),
                                            {a.groups, a.per_group, a.allow_short});
    rdm::write_subsets(subsets, m, a.out);
    say("subsets: " + std::to_string(subsets.size()) + " -> " + a.out.string());
}

// --- heads, predictions, CAM ----------------------------------------------------

struct TrainArgs {
    fs::path traces, manifest, out;
    std::string split;
    std::vector<std::string> layers;
    cam::TrainConfig cfg;
};

void run_train_heads(TrainArgs a) {
    const auto m = manifest_arg(a.manifest, a.split);
    const auto traces = traces_for(net::load_traces(a.traces), m);
    if (traces.empty()) {
        fail(Errc::EmptyInput, "no traces selected");
    }
    if (a.layers.empty()) {
        for (const auto& tap : traces.front().taps) {
            a.layers.push_back(tap.layer_name);
        }
    }
    std::vector<int> labels;
    for (const auto& t : traces) {
        labels.push_back(m.class_of(t.image_id));
    }
    a.cfg.record_loss = false;
    std::vector<cam::GapHead> heads(a.layers.size());
    parallel_for(a.layers.size(), [&](std::size_t i) {
        heads[i] = cam::train_gap_head(cam::gap_features(traces, a.layers[i]), labels, a.cfg, a.layers[i],
                                       m.n_classes());
    });
    for (const auto& h : heads) {
        cam::save_head(h, a.out);
        say("train-heads: " + h.layer_name + " iterations=" + std::to_string(h.train_meta.iterations) +
            " loss=" + report::format_real(h.train_meta.final_loss));
    }
}

struct PredictArgs {
    fs::path traces, manifest, heads, out, confidences;
    std::string split;
    std::string confidence_layer;
    std::size_t topk = 5;
};

void run_predict(const PredictArgs& a) {
    const auto m = manifest_arg(a.manifest, a.split);
    const auto traces = traces_for(net::load_traces(a.traces), m);
    const auto heads = cam::load_heads(a.heads);
    const auto rows = cam::per_layer_predictions(traces, heads, m, a.topk);
    if (!a.out.empty()) {
        report::write_table(cam::prediction_table(rows), a.out);
    }
    std::vector<std::string> layers;
    if (!traces.empty()) {
        for (const auto& tap : traces.front().taps) {
            layers.push_back(tap.layer_name);
        }
    }
    for (const auto& l : layers) {
        say("predict: " + l + " top1=" + report::format_real(cam::top1_accuracy(rows, l)));
    }
    if (!a.confidences.empty()) {
        const std::string layer = a.confidence_layer.empty() ? layers.back() : a.confidence_layer;
        const auto it = heads.find(layer);
        if (it == heads.end()) {
            fail(Errc::MissingHead, "no head for layer '" + layer + "'");
        }
        report::Table t{{"image_id", "confidence"}, {}};
        for (const auto& tr : traces) {
            const auto* tap = tr.find(layer);
            if (tap == nullptr) {
                fail(Errc::UnknownLayer, "trace '" + tr.image_id + "' has no tap '" + layer + "'");
            }
            const Tensor f = tap->fmap.rank() == 1 ? tap->fmap : net::gap(tap->fmap);
            const auto p = cam::softmax(cam::logits(it->second, f.values()));
            t.rows.push_back({tr.image_id, report::format_real(p.at(static_cast<std::size_t>(m.class_of(tr.image_id))))});
        }
        report::write_table(t, a.confidences);
    }
}

struct CamArgs {
    fs::path traces, heads, manifest, out;
    std::string image, layer;
    std::optional<int> klass;
    std::size_t topk = 0;
    bool overlay = false;
    double alpha = 0.5;
};

void run_cam(const CamArgs& a) {
    const auto traces = net::load_traces(a.traces);
    const net::ForwardTrace* trace = nullptr;
    for (const auto& t : traces) {
        if (t.image_id == a.image) {
            trace = &t;
        }
    }
    if (trace == nullptr) {
        fail(Errc::UnknownImage, "no trace for image '" + a.image + "'");
    }
    const auto* tap = trace->find(a.layer);
    if (tap == nullptr) {
        fail(Errc::UnknownLayer, "trace has no tap '" + a.layer + "'");
    }
    const auto head = cam::load_head(a.heads, a.layer);
    std::vector<int> classes;
    if (a.klass) {
        classes.push_back(*a.klass);
    }
    if (a.topk > 0) {
        for (const auto& p : cam::predict(head, net::gap(tap->fmap).values(), a.topk)) {
            classes.push_back(p.class_id);
        }
    }
    if (classes.empty()) {
        fail(Errc::BadArgument, "give --class or --topk");
    }
    std::optional<Tensor> image;
    if (a.overlay) {
        if (a.manifest.empty()) {
            fail(Errc::BadArgument, "--overlay needs --manifest to locate the input image");
        }
        const auto m = io::load_manifest(a.manifest);
        const auto idx = m.find(a.image);
        if (!idx) {
            fail(Errc::UnknownImage, "image '" + a.image + "' is not in the manifest");
        }
        image = io::read_tensor(m.resolve(m.records()[*idx]));
    }
    fs::create_directories(a.out);
    for (int c : classes) {
        const auto map = cam::cam_map(tap->fmap, head, c, a.image);
        const std::string stem = a.image + "." + a.layer + ".class" + std::to_string(c);
        io::write_tensor(map.grid, a.out / (stem + ".rstf"));
        if (image) {
            report::overlay_cam(*image, map.grid, a.alpha, report::default_colormap(), a.out / (stem + ".ppm"));
        }
        say("cam: " + stem);
    }
}

// --- render ---------------------------------------------------------------------

struct RenderArgs {
    fs::path matrix, rdm, out;
    std::size_t zoom = 1;
};

void run_render(const RenderArgs& a) {
    Matrix m;
    if (!a.matrix.empty() == !a.rdm.empty()) {
        fail(Errc::BadArgument, "give exactly one of --matrix or --rdm");
    }
    if (!a.matrix.empty()) {
        const Tensor t = io::read_tensor(a.matrix);
        if (t.rank() != 2) {
            fail(Errc::ShapeMismatch, "render needs a rank-2 tensor, got " + dims_to_string(t.dims()));
        }
        m = to_matrix(t);
    } else {
        m = rdm::load_rdm(a.rdm).as_matrix();
    }
    report::render_heatmap(m, report::default_colormap(), a.out, a.zoom);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"repscope: representation analysis for convolutional networks"};
    app.require_subcommand(1);

    ForwardArgs fwd;
    auto* c_fwd = app.add_subcommand("forward", "Run the network over a manifest and save tap traces");
    c_fwd->add_option("--net", fwd.net, "Network descriptor (JSON)")->required();
    c_fwd->add_option("--manifest", fwd.manifest, "Dataset manifest")->required();
    c_fwd->add_option("--split", fwd.split, "Restrict to train, val or test");
    c_fwd->add_option("--out", fwd.out, "Trace directory")->required();

    PatternArgs pat;
    auto* c_pat = app.add_subcommand("patterns", "Build response vectors, class thresholds and activity patterns");
    c_pat->add_option("--traces", pat.traces, "Trace directory")->required();
    c_pat->add_option("--manifest", pat.manifest, "Dataset manifest")->required();
    c_pat->add_option("--split", pat.split, "Restrict to train, val or test");
    c_pat->add_option("--fraction", pat.fraction, "Response fraction")->capture_default_str();
    c_pat->add_option("--mode", pat.mode, "top (top-fraction mean) or scaled (fraction x mean)")
        ->capture_default_str();
    c_pat->add_option("--out", pat.out, "Pattern directory")->required();

    StatsArgs st;
    auto* c_st = app.add_subcommand("stats", "Activation histograms for one layer");
    c_st->add_option("--patterns", st.patterns, "Pattern directory")->required();
    c_st->add_option("--layer", st.layer, "Layer name")->required();
    c_st->add_flag("--per-image", st.per_image, "Histogram of activated neurons per image");
    c_st->add_flag("--per-neuron", st.per_neuron, "Histogram of images activating each neuron");
    c_st->add_option("--neuron", st.neuron, "Response-value histogram of this neuron (needs --class)");
    c_st->add_option("--class", st.klass, "Restrict to one class");
    c_st->add_option("--bins", st.bins, "Bins for --neuron")->capture_default_str();
    c_st->add_option("--out", st.out, "Output table (default stdout)");

    auto* c_rdm = app.add_subcommand("rdm", "Dissimilarity matrices");
    c_rdm->require_subcommand(1);
    RdmBuildArgs rb;
    auto* c_rb = c_rdm->add_subcommand("build", "RDM of one layer's activity patterns");
    c_rb->add_option("--patterns", rb.patterns, "Pattern directory")->required();
    c_rb->add_option("--layer", rb.layer, "Layer name")->required();
    c_rb->add_option("--subset", rb.subset, "Manifest selecting and ordering the images");
    c_rb->add_flag("--rank", rb.rank, "Apply the rank transform");
    c_rb->add_option("--out", rb.out, "Output prefix")->required();
    RdmRankArgs rr;
    auto* c_rr = c_rdm->add_subcommand("rank", "Rank-transform a saved RDM");
    c_rr->add_option("--in", rr.in, "Input prefix")->required();
    c_rr->add_option("--out", rr.out, "Output prefix")->required();
    RdmCompareArgs rc;
    auto* c_rc = c_rdm->add_subcommand("corr", "Pairwise correlation between saved RDMs");
    c_rc->add_option("--in", rc.in, "Input prefix (repeat)")->required();
    c_rc->add_option("--name", rc.names, "Display name per input (repeat)");
    c_rc->add_option("--method", rc.method, "pearson or spearman")->capture_default_str();
    c_rc->add_option("--out", rc.out, "Output table (default stdout)");
    RdmCompareArgs rm;
    auto* c_rm = c_rdm->add_subcommand("mds", "Classical MDS of saved RDMs");
    c_rm->add_option("--in", rm.in, "Input prefix (repeat)")->required();
    c_rm->add_option("--name", rm.names, "Display name per input (repeat)");
    c_rm->add_option("--method", rm.method, "pearson or spearman")->capture_default_str();
    c_rm->add_option("--dim", rm.dim, "Embedding dimension")->capture_default_str();
    c_rm->add_option("--out", rm.out, "Embedding table")->required();

    SubsetArgs sb;
    auto* c_sb = app.add_subcommand("subsets", "Confidence-ranked image subsets");
    c_sb->add_option("--manifest", sb.manifest, "Dataset manifest")->required();
    c_sb->add_option("--split", sb.split, "Restrict to train, val or test");
    c_sb->add_option("--confidences", sb.confidences, "Table with image_id and confidence columns")->required();
    c_sb->add_option("--groups", sb.groups, "Number of subsets")->capture_default_str();
    c_sb->add_option("--per-group", sb.per_group, "Images per class per subset")->capture_default_str();
    c_sb->add_flag("--allow-short", sb.allow_short, "Accept classes with too few images");
    c_sb->add_option("--out", sb.out, "Output directory")->required();

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train-heads", "Train GAP softmax heads on tap features");
    c_tr->add_option("--traces", tr.traces, "Trace directory")->required();
    c_tr->add_option("--manifest", tr.manifest, "Dataset manifest (labels)")->required();
    c_tr->add_option("--split", tr.split, "Restrict to train, val or test");
    c_tr->add_option("--layer", tr.layers, "Layer (repeat; default every tap)");
    c_tr->add_option("--lr", tr.cfg.learning_rate, "Learning rate")->capture_default_str();
    c_tr->add_option("--l2", tr.cfg.l2, "L2 penalty on weights")->capture_default_str();
    c_tr->add_option("--max-iters", tr.cfg.max_iters, "Iteration cap")->capture_default_str();
    c_tr->add_option("--grad-tol", tr.cfg.grad_tol, "Stop when the max-abs gradient falls to this")
        ->capture_default_str();
    c_tr->add_option("--out", tr.out, "Head directory")->required();

    PredictArgs pr;
    auto* c_pr = app.add_subcommand("predict", "Per-layer predictions from trained heads");
    c_pr->add_option("--traces", pr.traces, "Trace directory")->required();
    c_pr->add_option("--manifest", pr.manifest, "Dataset manifest (labels)")->required();
    c_pr->add_option("--split", pr.split, "Restrict to train, val or test");
    c_pr->add_option("--heads", pr.heads, "Head directory")->required();
    c_pr->add_option("--topk", pr.topk, "Predictions per image and layer")->capture_default_str();
    c_pr->add_option("--out", pr.out, "Prediction table");
    c_pr->add_option("--confidences", pr.confidences, "Write Top-1 confidence of the true class per image");
    c_pr->add_option("--confidence-layer", pr.confidence_layer, "Layer for --confidences (default last tap)");

    CamArgs cm;
    auto* c_cm = app.add_subcommand("cam", "Class activation maps for one image");
    c_cm->add_option("--traces", cm.traces, "Trace directory")->required();
    c_cm->add_option("--heads", cm.heads, "Head directory")->required();
    c_cm->add_option("--image", cm.image, "Image id")->required();
    c_cm->add_option("--layer", cm.layer, "Layer name")->required();
    c_cm->add_option("--class", cm.klass, "Class id");
    c_cm->add_option("--topk", cm.topk, "Also map the k most probable classes");
    c_cm->add_flag("--overlay", cm.overlay, "Write a PPM overlay on the input image");
    c_cm->add_option("--manifest", cm.manifest, "Manifest locating the input image (for --overlay)");
    c_cm->add_option("--alpha", cm.alpha, "Overlay opacity")->capture_default_str();
    c_cm->add_option("--out", cm.out, "Output directory")->required();

    RenderArgs rd;
    auto* c_rd = app.add_subcommand("render", "Render a matrix as a PPM heatmap");
    c_rd->add_option("--matrix", rd.matrix, "Rank-2 RSTF tensor");
    c_rd->add_option("--rdm", rd.rdm, "Saved RDM prefix");
    c_rd->add_option("--zoom", rd.zoom, "Pixels per cell")->capture_default_str();
    c_rd->add_option("--out", rd.out, "Output .ppm")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_fwd->parsed()) {
            run_forward(fwd);
        } else if (c_pat->parsed()) {
            run_patterns(pat);
        } else if (c_st->parsed()) {
            run_stats(st);
        } else if (c_rb->parsed()) {
            run_rdm_build(rb);
        } else if (c_rr->parsed()) {
            run_rdm_rank(rr);
        } else if (c_rc->parsed()) {
            run_rdm_corr(rc);
        } else if (c_rm->parsed()) {
            run_rdm_mds(rm);
        } else if (c_sb->parsed()) {
            run_subsets(sb);
        } else if (c_tr->parsed()) {
            run_train_heads(tr);
        } else if (c_pr->parsed()) {
            run_predict(pr);
        } else if (c_cm->parsed()) {
            run_cam(cm);
        } else if (c_rd->parsed()) {
            run_render(rd);
        }
    } catch (const Error& e) {
        std::cerr << "repscope: " << errc_name(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "repscope: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
