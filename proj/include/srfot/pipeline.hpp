#pragma once

#include <string>
#include <vector>

#include "srfot/core.hpp"
#include "srfot/prompts.hpp"
#include "srfot/provider.hpp"

namespace srfot {

struct StageBinding {
    StageKind kind = StageKind::QuestionExplanation;
    VisibilityMask mask;
    std::string template_name;

    bool operator==(const StageBinding&) const = default;
};

struct PipelineSpec {
    VariantId variant = VariantId::SRFoT;
    std::vector<StageBinding> stages;

    std::vector<StageKind> stage_kinds() const;
};

// Stage list + masks for each variant: the five-stage default, the baselines,
// and the stage/visibility ablations.
PipelineSpec build_variant(VariantId v);

struct PromptEnv {
    const TemplateLibrary* templates = nullptr;
    const ExemplarLibrary* exemplars = nullptr;
    std::string dataset_id;
};

// Field values a stage may see: the instance fields plus previously produced
// artifacts, restricted to `mask`. Artifacts not yet produced are skipped.
FieldMap visible_fields(const VisibilityMask& mask, const TaskInstance& inst,
                        const std::map<StageKind, std::string>& artifacts);

// Stage output → artifact handed to later stages (strips echoed cues; pulls
// the sentence after the last "Minor premise:" marker for stage 4).
std::string parse_stage_artifact(StageKind kind, const std::string& completion);

// Executes the stages strictly in order. A failing stage is recorded and
// aborts the rest; the transcript keeps the partial records. The final
// stage's completion goes through answer extraction.
Transcript run_pipeline(const PipelineSpec& spec, const TaskInstance& inst,
                        const SamplingParams& params, Provider& provider, const PromptEnv& env,
                        int sample_index = 0);

// N independent full-pipeline runs, sample_index 0..N-1. With
// `freeze_shared_stages`, samples > 0 reuse sample 0's non-final stages and
// resample only the last stage.
std::vector<Transcript> run_multi(const PipelineSpec& spec, const TaskInstance& inst,
                                  const SamplingParams& params, Provider& provider,
                                  const PromptEnv& env, bool freeze_shared_stages = false);

}  // namespace srfot
