#include "tap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tap/util.hpp"

namespace tap {

namespace {

// Deterministic ranking: score desc, then video/window/trigger as tiebreak.
bool proposal_before(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    const auto& wa = a.eval_window();
    const auto& wb = b.eval_window();
    if (wa.left != wb.left) return wa.left < wb.left;
    if (wa.right != wb.right) return wa.right < wb.right;
    return a.is_trigger && !b.is_trigger;
}

std::map<std::string, std::vector<const Proposal*>> group_by_video(
    const std::vector<Proposal>& proposals) {
    std::map<std::string, std::vector<const Proposal*>> by_video;
    for (const auto& p : proposals) by_video[p.video_id].push_back(&p);
    for (auto& [id, list] : by_video) {
        std::sort(list.begin(), list.end(),
                  [](const Proposal* a, const Proposal* b) { return proposal_before(*a, *b); });
    }
    return by_video;
}

}  // namespace

std::vector<Proposal> score_proposals(const std::string& video_id,
                                      const std::vector<VisitedWindow>& visited, double bonus) {
    std::vector<Proposal> out;
    out.reserve(visited.size());
    for (const auto& vw : visited) {
        Proposal p;
        p.video_id = video_id;
        p.window = vw.window;
        p.score = vw.value + (vw.is_trigger ? bonus : 0.0);
        p.is_trigger = vw.is_trigger;
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), proposal_before);
    return out;
}

double recall_at(const std::vector<Proposal>& proposals, const Dataset& ds, double iou_thresh,
                 int k) {
    if (k < 1) throw std::invalid_argument("recall_at requires k >= 1");
    const auto by_video = group_by_video(proposals);
    int total = 0;
    int recalled = 0;
    for (const auto& v : ds.videos) {
        total += static_cast<int>(v.ground_truths.size());
        const auto it = by_video.find(v.id);
        if (it == by_video.end()) continue;
        const auto& ranked = it->second;
        const int top = std::min<int>(k, static_cast<int>(ranked.size()));
        for (const auto& gt : v.ground_truths) {
            for (int i = 0; i < top; ++i) {
                if (iou(ranked[i]->eval_window(), gt.window) >= iou_thresh) {
                    ++recalled;
                    break;
                }
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(recalled) / total;
}

RecallCurve recall_vs_num_proposals(const std::vector<Proposal>& proposals, const Dataset& ds,
                                    double iou_thresh, const std::vector<int>& k_grid) {
    RecallCurve curve;
    curve.reserve(k_grid.size());
    for (int k : k_grid) curve.emplace_back(k, recall_at(proposals, ds, iou_thresh, k));
    return curve;
}

RecallCurve recall_vs_iou(const std::vector<Proposal>& proposals, const Dataset& ds, int k) {
    RecallCurve curve;
    for (int i = 1; i <= 20; ++i) {
        const double t = 0.05 * i;
        curve.emplace_back(t, recall_at(proposals, ds, t, k));
    }
    return curve;
}

double average_precision(const std::vector<Proposal>& class_proposals, const Dataset& ds,
                         int class_id, double iou_thresh) {
    int gt_total = 0;
    std::map<std::string, std::vector<const GroundTruth*>> gts;
    for (const auto& v : ds.videos) {
        for (const auto& gt : v.ground_truths) {
            if (gt.class_id == class_id) {
                gts[v.id].push_back(&gt);
                ++gt_total;
            }
        }
    }
    if (gt_total == 0) return 0.0;

    std::vector<const Proposal*> ranked;
    for (const auto& p : class_proposals)
        if (p.class_id == class_id) ranked.push_back(&p);
    std::sort(ranked.begin(), ranked.end(),
              [](const Proposal* a, const Proposal* b) { return proposal_before(*a, *b); });

    std::map<const GroundTruth*, bool> matched;
    std::vector<bool> is_tp(ranked.size(), false);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto it = gts.find(ranked[i]->video_id);
        if (it == gts.end()) continue;
        const GroundTruth* best = nullptr;
        double best_iou_v = -1.0;
        for (const GroundTruth* gt : it->second) {
            if (matched[gt]) continue;
            const double v = iou(ranked[i]->eval_window(), gt->window);
            if (v >= iou_thresh && v > best_iou_v) {
                best = gt;
                best_iou_v = v;
            }
        }
        if (best) {
            matched[best] = true;
            is_tp[i] = true;
        }
    }

    // exact area under the precision envelope
    std::vector<double> precision(ranked.size());
    std::vector<double> recall(ranked.size());
    int tp = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (is_tp[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / gt_total;
    }
    for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i)
        precision[i] = std::max(precision[i], precision[i + 1]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (recall[i] > prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

double map_at(const std::vector<Proposal>& classified, const Dataset& ds, double iou_thresh,
              std::vector<double>* per_class) {
    const int classes = ds.class_count();
    if (per_class) per_class->assign(classes, 0.0);
    double sum = 0.0;
    int counted = 0;
    for (int c = 0; c < classes; ++c) {
        bool has_gt = false;
        for (const auto& v : ds.videos)
            for (const auto& gt : v.ground_truths)
                if (gt.class_id == c) has_gt = true;
        if (!has_gt) continue;
        const double ap = average_precision(classified, ds, c, iou_thresh);
        if (per_class) (*per_class)[c] = ap;
        sum += ap;
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / counted;
}

std::vector<Proposal> cap_average_proposals(std::vector<Proposal> proposals, const Dataset& ds,
                                            int avg_per_video) {
    const std::size_t budget =
        static_cast<std::size_t>(avg_per_video) * std::max<std::size_t>(1, ds.videos.size());
    if (proposals.size() <= budget) return proposals;
    std::sort(proposals.begin(), proposals.end(), proposal_before);
    proposals.resize(budget);
    return proposals;
}

AgentAction oracle_policy(const VideoRecord& v, const TemporalWindow& w,
                          const TransformConfig& cfg, double tau) {
    if (best_iou(v, w) >= tau) return AgentAction::Trigger;
    static const AgentAction regular[] = {AgentAction::MoveLeft, AgentAction::MoveRight,
                                          AgentAction::ExpandLeft, AgentAction::ExpandRight,
                                          AgentAction::Shrink};
    Rng unused(0);  // regular transforms never draw from it
    AgentAction best_action = AgentAction::Jump;
    double best = 0.0;
    for (AgentAction a : regular) {
        const TemporalWindow next = apply_transform(w, a, cfg, v.frame_count, unused);
        const double score = best_iou(v, next);
        if (score > best) {
            best = score;
            best_action = a;
        }
    }
    return best == 0.0 ? AgentAction::Jump : best_action;
}

ClassifierMode parse_classifier_mode(const std::string& s) {
    if (s == "oracle") return ClassifierMode::Oracle;
    if (s == "centroid") return ClassifierMode::Centroid;
    throw std::invalid_argument("unknown classifier mode: " + s);
}

ClassifierStub::ClassifierStub(ClassifierMode mode, const Dataset& ds, FeatureMode feature_mode,
                               double background_threshold)
    : mode_(mode), ds_(ds), feature_mode_(feature_mode), threshold_(background_threshold) {
    if (mode_ == ClassifierMode::Centroid) {
        embeddings_ = make_class_embeddings(ds.seed, ds.class_count(), ds.feature_dim());
    }
}

int ClassifierStub::classify(const Proposal& p) const {
    const VideoRecord* v = ds_.find_video(p.video_id);
    if (v == nullptr) throw DataError("proposal references unknown video " + p.video_id);
    const TemporalWindow& w = p.eval_window();
    if (mode_ == ClassifierMode::Oracle) {
        int best_class = -1;
        double best = 0.0;
        for (const auto& gt : v->ground_truths) {
            const double o = iou(w, gt.window);
            if (o > best) {
                best = o;
                best_class = gt.class_id;
            }
        }
        return best_class;
    }
    const std::vector<float> f = window_feature(*v, w, feature_mode_);
    double fnorm = 0.0;
    for (float x : f) fnorm += static_cast<double>(x) * x;
    fnorm = std::sqrt(fnorm);
    if (fnorm == 0.0) return -1;
    int best_class = -1;
    double best = threshold_;
    for (int c = 0; c < ds_.class_count(); ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j)
            d += static_cast<double>(f[j]) * embeddings_[c][j];
        const double cosine = d / fnorm;  // embeddings are unit norm
        if (cosine >= best) {
            best = cosine;
            best_class = c;
        }
    }
    return best_class;
}

void ClassifierStub::classify_all(std::vector<Proposal>& proposals) const {
    for (auto& p : proposals) p.class_id = classify(p);
}

std::vector<Proposal> temporal_nms(std::vector<Proposal> proposals, double iou_thresh) {
    auto by_video = group_by_video(proposals);
    std::vector<Proposal> kept;
    for (auto& [id, ranked] : by_video) {
        std::vector<const Proposal*> survivors;
        for (const Proposal* p : ranked) {
            bool suppressed = false;
            for (const Proposal* s : survivors) {
                if (iou(p->eval_window(), s->eval_window()) > iou_thresh) {
                    suppressed = true;
                    break;
                }
            }
            if (!suppressed) survivors.push_back(p);
        }
        for (const Proposal* p : survivors) kept.push_back(*p);
    }
    std::sort(kept.begin(), kept.end(), proposal_before);
    return kept;
}

std::string proposals_to_csv(const std::vector<Proposal>& proposals) {
    std::string out = "video_id,left,right,score,is_trigger,class_id\n";
    for (const auto& p : proposals) {
        const TemporalWindow& w = p.eval_window();
        out += p.video_id;
        out += ',';
        out += std::to_string(w.left);
        out += ',';
        out += std::to_string(w.right);
        out += ',';
        out += format_double(p.score);
        out += ',';
        out += p.is_trigger ? '1' : '0';
        out += ',';
        out += std::to_string(p.class_id);
        out += '\n';
    }
    return out;
}

std::vector<Proposal> proposals_from_csv(const std::string& text) {
    std::vector<Proposal> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("video_id,", 0) == 0) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 6)
            throw DataError("proposal file line " + std::to_string(line_no) + ": expected 6 fields, got " +
                            std::to_string(fields.size()));
        try {
            Proposal p;
            p.video_id = fields[0];
            p.window.left = std::stoi(fields[1]);
            p.window.right = std::stoi(fields[2]);
            p.score = std::stod(fields[3]);
            p.is_trigger = std::stoi(fields[4]) != 0;
            p.class_id = std::stoi(fields[5]);
            if (!p.window.valid())
                throw DataError("proposal file line " + std::to_string(line_no) + ": invalid window");
            out.push_back(std::move(p));
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("proposal file line " + std::to_string(line_no) + ": malformed row");
        }
    }
    return out;
}

void save_proposals(const std::filesystem::path& path, const std::vector<Proposal>& proposals) {
    atomic_write_file(path, proposals_to_csv(proposals));
}

std::vector<Proposal> load_proposals(const std::filesystem::path& path) {
    return proposals_from_csv(read_file_text(path));
}

std::string curve_to_csv(const RecallCurve& curve, const std::string& x_name,
                         const std::string& y_name) {
    std::string out = x_name + "," + y_name + "\n";
    for (const auto& [x, y] : curve) {
        out += format_double(x);
        out += ',';
        out += format_double(y);
        out += '\n';
    }
    return out;
}

}  // namespace tap
