#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tap/dataset_io.hpp"
#include "tap/environment.hpp"
#include "tap/proposal.hpp"

namespace tap {

/// (x, y) samples of a recall curve; x is proposals-per-video or an IoU
/// threshold depending on the producing call.
using RecallCurve = std::vector<std::pair<double, double>>;

/// Turn a search trace into scored proposals for one video: score is the
/// policy value at the window plus a rank-dominant bonus for triggers.
/// Returned sorted by descending score.
std::vector<Proposal> score_proposals(const std::string& video_id,
                                      const std::vector<VisitedWindow>& visited, double bonus);

/// Coverage recall: a ground truth counts as recalled when any of the
/// top-k proposals of its video reaches the IoU threshold. Pooled over all
/// ground truths of all classes.
double recall_at(const std::vector<Proposal>& proposals, const Dataset& ds, double iou_thresh,
                 int k);

RecallCurve recall_vs_num_proposals(const std::vector<Proposal>& proposals, const Dataset& ds,
                                    double iou_thresh, const std::vector<int>& k_grid);

RecallCurve recall_vs_iou(const std::vector<Proposal>& proposals, const Dataset& ds, int k);

/// Detection AP for one class: proposals ranked globally by score, greedy
/// single-match against same-class ground truths, exact area under the
/// precision envelope.
double average_precision(const std::vector<Proposal>& class_proposals, const Dataset& ds,
                         int class_id, double iou_thresh);

/// Mean AP over classes that have at least one ground truth.
double map_at(const std::vector<Proposal>& classified, const Dataset& ds, double iou_thresh,
              std::vector<double>* per_class = nullptr);

/// Keep the top (avg_per_video * video_count) proposals by score.
std::vector<Proposal> cap_average_proposals(std::vector<Proposal> proposals, const Dataset& ds,
                                            int avg_per_video);

/// Ground-truth-aware greedy policy used to validate the environment.
AgentAction oracle_policy(const VideoRecord& v, const TemporalWindow& w,
                          const TransformConfig& cfg, double tau);

enum class ClassifierMode { Oracle, Centroid };

ClassifierMode parse_classifier_mode(const std::string& s);

/// Stand-in for the external action classifier. Oracle mode reads the
/// ground truth; centroid mode matches the window feature against the
/// class embeddings by cosine similarity with a background threshold.
class ClassifierStub {
public:
    ClassifierStub(ClassifierMode mode, const Dataset& ds, FeatureMode feature_mode,
                   double background_threshold = 0.5);

    /// Returns a class id or -1 for background.
    int classify(const Proposal& p) const;

    void classify_all(std::vector<Proposal>& proposals) const;

private:
    ClassifierMode mode_;
    const Dataset& ds_;
    FeatureMode feature_mode_;
    double threshold_;
    std::vector<std::vector<float>> embeddings_;
};

/// Optional temporal NMS pass (off by default in the pipeline).
std::vector<Proposal> temporal_nms(std::vector<Proposal> proposals, double iou_thresh);

/// Proposal file: CSV rows video_id,left,right,score,is_trigger,class_id.
std::string proposals_to_csv(const std::vector<Proposal>& proposals);
std::vector<Proposal> proposals_from_csv(const std::string& text);
void save_proposals(const std::filesystem::path& path, const std::vector<Proposal>& proposals);
std::vector<Proposal> load_proposals(const std::filesystem::path& path);

std::string curve_to_csv(const RecallCurve& curve, const std::string& x_name,
                         const std::string& y_name);

}  // namespace tap
