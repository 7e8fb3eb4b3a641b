#include "vsnt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include "vsnt/errors.hpp"
#include "vsnt/generator.hpp"
#include "vsnt/sampling.hpp"
#include "vsnt/seed.hpp"

namespace vsnt {
namespace {

void require_each_class(const DatasetManifest& m, const std::vector<VideoMeta>& videos, const char* split) {
    std::set<std::string> present;
    for (const auto& v : videos) present.insert(v.label);
    for (const auto& c : m.classes)
        if (!present.count(c))
            throw ValidationError(std::string("the ") + split + " split has no video of class '" + c + "'");
}

std::size_t count_correct(const std::vector<float>& probs, const std::vector<std::size_t>& labels,
                          double threshold) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) n += (probs[i] >= threshold ? 1u : 0u) == labels[i];
    return n;
}

Tensor<float> as_batch(Tensor<float> seq) {
    Shape s{1};
    s.insert(s.end(), seq.shape().begin(), seq.shape().end());
    return seq.reshape(s);
}

}  // namespace

std::string LearningCurve::to_csv() const {
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss, r.train_acc, r.val_loss,
                      r.val_acc);
        out += buf;
    }
    return out;
}

std::string LearningCurve::to_svg() const {
    const double w = 640, h = 360, left = 50, right = 130, top = 20, bottom = 40;
    const double pw = w - left - right, ph = h - top - bottom;
    double ymax = 1.0;
    for (const auto& r : rows) ymax = std::max({ymax, r.train_loss, r.val_loss});
    const std::size_t n = rows.size();
    auto px = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / double(n - 1) : pw / 2); };
    auto py = [&](double v) { return top + ph * (1.0 - v / ymax); };

    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\" text-anchor=\"middle\">epoch"
      << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = ymax * k / 4.0;
        s << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << v
          << "</text>\n";
    }
    struct Series {
        const char* name;
        const char* color;
        double CurveRow::*field;
    };
    const Series series[] = {{"train_loss", "#d62728", &CurveRow::train_loss},
                             {"val_loss", "#ff9896", &CurveRow::val_loss},
                             {"train_acc", "#1f77b4", &CurveRow::train_acc},
                             {"val_acc", "#aec7e8", &CurveRow::val_acc}};
    int legend = 0;
    for (const auto& se : series) {
        s << "<polyline fill=\"none\" stroke=\"" << se.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < n; ++i) s << px(i) << "," << py(rows[i].*se.field) << " ";
        s << "\"/>\n";
        const double ly = top + 15 + 18 * legend++;
        s << "<line x1=\"" << w - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - right + 30 << "\" y2=\"" << ly
          << "\" stroke=\"" << se.color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << w - right + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << se.name
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

TrainResult train(const ModelConfig& cfg, const DatasetManifest& manifest, const TrainOptions& opts) {
    cfg.validate();
    manifest.validate();
    if (manifest.split.empty()) throw ValidationError("train: manifest has no split");
    const auto train_set = manifest.partition(Partition::train);
    const auto test_set = manifest.partition(Partition::test);
    require_each_class(manifest, train_set, "train");
    require_each_class(manifest, test_set, "test");
    const auto train_labels = manifest.labels_of(train_set);
    const auto test_labels = manifest.labels_of(test_set);

    TrainResult result;
    result.model = std::make_unique<Model>(cfg, opts.seed);
    Model& model = *result.model;
    std::optional<MomentumSgd<float>> optimizer;
    if (cfg.lr > 0.0)
        optimizer.emplace(model.parameters(), static_cast<float>(cfg.lr), static_cast<float>(cfg.momentum));
    Rng dropout_rng(derive_seed(opts.seed, 1));

    // Held-out batches are fixed across epochs, so load them once.
    std::vector<Batch> val_batches;
    {
        GeneratorOptions g;
        g.batch = cfg.batch;
        g.buffer = opts.buffer;
        g.shuffle = false;
        BatchGenerator gen(test_set, test_labels, cfg, g);
        while (auto b = gen.next()) val_batches.push_back(std::move(*b));
        result.skipped_videos += gen.skipped_count();
    }

    for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        GeneratorOptions g;
        g.batch = cfg.batch;
        g.buffer = opts.buffer;
        g.seed = derive_seed(opts.seed, 1000 + epoch);
        g.augment = cfg.augment;
        BatchGenerator gen(train_set, train_labels, cfg, g);

        double loss_sum = 0.0;
        std::size_t seen = 0, correct = 0, batch_no = 0;
        while (auto b = gen.next()) {
            ++batch_no;
            try {
                auto out = model.forward(b->frames, Mode::train, dropout_rng);
                auto loss = model.loss(out, b->labels);
                const double lv = loss.item();
                if (!std::isfinite(lv)) throw NumericError("loss is " + std::to_string(lv));
                const auto probs = model.positive_probabilities(out);
                correct += count_correct(probs, b->labels, opts.threshold);
                loss_sum += lv * static_cast<double>(b->labels.size());
                seen += b->labels.size();
                if (optimizer) {
                    loss.backward();
                    optimizer->step();
                }
            } catch (const NumericError& e) {
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch_no) + ": " + e.what());
            }
        }
        if (epoch == 1) result.skipped_videos += gen.skipped_count();
        if (seen == 0) throw ValidationError("train: no readable training videos");

        double val_loss = 0.0;
        std::size_t val_seen = 0, val_correct = 0;
        {
            NoGradGuard no_grad;
            Rng unused(0);
            for (const auto& b : val_batches) {
                auto out = model.forward(b.frames, Mode::eval, unused);
                val_loss += model.loss(out, b.labels).item() * static_cast<double>(b.labels.size());
                val_correct += count_correct(model.positive_probabilities(out), b.labels, opts.threshold);
                val_seen += b.labels.size();
            }
        }
        CurveRow row{epoch, loss_sum / static_cast<double>(seen), static_cast<double>(correct) / double(seen),
                     val_seen ? val_loss / static_cast<double>(val_seen) : 0.0,
                     val_seen ? static_cast<double>(val_correct) / static_cast<double>(val_seen) : 0.0};
        result.curve.rows.push_back(row);
        if (opts.on_epoch && !opts.on_epoch(row)) break;
    }
    return result;
}

VideoScore score_video(const Model& model, const VideoMeta& video, SampleMode mode) {
    video.validate();
    const auto& cfg = model.config();
    VideoScore score;
    if (mode == SampleMode::single_sequence) {
        auto s = sample_whole_video(video.n_frames, cfg.seq_len);
        score.padded = s.padded;
        const double p = model.predict(as_batch(load_frames(video, s.indices, cfg.frame_size)))[0];
        score.window_probabilities.push_back(p);
        score.window_starts.push_back(0);
        score.probability = p;
        return score;
    }
    const std::size_t step = compute_step(video.fps, cfg.window_seconds, cfg.seq_len);
    score.probability = 0.0;
    for (const auto& w : sliding_windows(video.n_frames, cfg.seq_len, step, cfg.effective_sliding_stride())) {
        const double p = model.predict(as_batch(load_frames(video, w.indices, cfg.frame_size)))[0];
        score.window_probabilities.push_back(p);
        score.window_starts.push_back(w.start);
        score.padded = score.padded || w.padded;
        score.probability = std::max(score.probability, p);
    }
    return score;
}

MetricsReport evaluate(const Model& model, const DatasetManifest& manifest, Partition split, double threshold,
                       SampleMode mode) {
    const auto videos = manifest.partition(split);
    if (videos.empty()) throw ValidationError("evaluate: the " + to_string(split) + " split is empty");
    std::vector<Prediction> preds;
    for (const auto& v : videos)
        preds.push_back({v.id, manifest.class_index(v.label), score_video(model, v, mode).probability, 0});
    return metrics_from_predictions(std::move(preds), threshold);
}

}  // namespace vsnt
