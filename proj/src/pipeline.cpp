#include "srfot/pipeline.hpp"

#include <cctype>
#include <chrono>

#include "srfot/aggregate.hpp"

namespace srfot {

std::vector<StageKind> PipelineSpec::stage_kinds() const {
    std::vector<StageKind> kinds;
    kinds.reserve(stages.size());
    for (const auto& s : stages) kinds.push_back(s.kind);
    return kinds;
}

PipelineSpec build_variant(VariantId v) {
    using K = StageKind;
    using T = FieldTag;
    auto stage = [](K kind, std::string name) {
        return StageBinding{kind, default_mask(kind), std::move(name)};
    };

    PipelineSpec spec;
    spec.variant = v;
    switch (v) {
        case VariantId::SRFoT:
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                stage(K::MajorPremise, "major_premise"),
                stage(K::MinorPremiseQuestion, "minor_premise_question"),
                stage(K::MinorPremise, "minor_premise"),
                stage(K::SyllogisticReasoning, "syllogistic_reasoning"),
            };
            break;
        case VariantId::Base:
            spec.stages = {stage(K::DirectAnswer, "direct_answer")};
            break;
        case VariantId::CoT:
            spec.stages = {stage(K::ChainOfThought, "chain_of_thought")};
            break;
        case VariantId::SRFoT_NoExplanation: {
            StageBinding mp = stage(K::MajorPremise, "major_premise_no_explanation");
            mp.mask.remove(T::Explanation);
            spec.stages = {
                mp,
                stage(K::MinorPremiseQuestion, "minor_premise_question"),
                stage(K::MinorPremise, "minor_premise"),
                stage(K::SyllogisticReasoning, "syllogistic_reasoning"),
            };
            break;
        }
        case VariantId::SRFoT_NoMajor: {
            StageBinding qmp = stage(K::MinorPremiseQuestion, "minor_premise_question_no_major");
            qmp.mask.remove(T::MajorPremise);
            StageBinding sr = stage(K::SyllogisticReasoning, "syllogistic_reasoning_no_major");
            sr.mask.remove(T::MajorPremise);
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                qmp,
                stage(K::MinorPremise, "minor_premise"),
                sr,
            };
            break;
        }
        case VariantId::SRFoT_NoMinor: {
            StageBinding sr = stage(K::SyllogisticReasoning, "syllogistic_reasoning_no_minor");
            sr.mask.remove(T::MinorPremise);
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                stage(K::MajorPremise, "major_premise"),
                sr,
            };
            break;
        }
        case VariantId::AllInOneStage: {
            StageBinding all{K::SyllogisticReasoning,
                             VisibilityMask{T::Question, T::Context, T::Options},
                             "all_in_one"};
            spec.stages = {all};
            break;
        }
        case VariantId::SRFoT_NoStage3: {
            StageBinding mp{K::MinorPremise,
                            VisibilityMask{T::Question, T::Context, T::Options, T::MajorPremise},
                            "minor_premise_direct"};
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                stage(K::MajorPremise, "major_premise"),
                mp,
                stage(K::SyllogisticReasoning, "syllogistic_reasoning"),
            };
            break;
        }
        case VariantId::SRFoT_NoContextStage3: {
            StageBinding qmp = stage(K::MinorPremiseQuestion, "minor_premise_question_no_context");
            qmp.mask.remove(T::Context);
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                stage(K::MajorPremise, "major_premise"),
                qmp,
                stage(K::MinorPremise, "minor_premise"),
                stage(K::SyllogisticReasoning, "syllogistic_reasoning"),
            };
            break;
        }
        case VariantId::SRFoT_QoriStage4: {
            StageBinding mp = stage(K::MinorPremise, "minor_premise_with_question");
            mp.mask.add(T::Question);
            spec.stages = {
                stage(K::QuestionExplanation, "question_explanation"),
                stage(K::MajorPremise, "major_premise"),
                stage(K::MinorPremiseQuestion, "minor_premise_question"),
                mp,
                stage(K::SyllogisticReasoning, "syllogistic_reasoning"),
            };
            break;
        }
    }
    if (spec.stages.empty()) throw ConfigError("unknown variant id");
    return spec;
}

FieldMap visible_fields(const VisibilityMask& mask, const TaskInstance& inst,
                        const std::map<StageKind, std::string>& artifacts) {
    FieldMap fields;
    auto artifact = [&](StageKind k) -> const std::string* {
        auto it = artifacts.find(k);
        return it == artifacts.end() ? nullptr : &it->second;
    };
    for (FieldTag tag : mask.tags()) {
        switch (tag) {
            case FieldTag::Question:
                fields[tag] = inst.question;
                break;
            case FieldTag::Context:
                fields[tag] = inst.context;  // may be empty
                break;
            case FieldTag::Options:
                if (inst.answer_space == AnswerSpace::MultipleChoice) {
                    fields[tag] = render_options(inst.options);
                }
                break;
            case FieldTag::Explanation:
                if (auto* a = artifact(StageKind::QuestionExplanation)) fields[tag] = *a;
                break;
            case FieldTag::MajorPremise:
                if (auto* a = artifact(StageKind::MajorPremise)) fields[tag] = *a;
                break;
            case FieldTag::MinorPremiseQuestion:
                if (auto* a = artifact(StageKind::MinorPremiseQuestion)) fields[tag] = *a;
                break;
            case FieldTag::MinorPremise:
                if (auto* a = artifact(StageKind::MinorPremise)) fields[tag] = *a;
                break;
        }
    }
    return fields;
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::size_t find_last_ci(const std::string& haystack, std::string_view needle) {
    if (needle.empty() || haystack.size() < needle.size()) return std::string::npos;
    for (std::size_t i = haystack.size() - needle.size() + 1; i-- > 0;) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (std::tolower(static_cast<unsigned char>(haystack[i + j])) !=
                std::tolower(static_cast<unsigned char>(needle[j]))) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::string::npos;
}

}  // namespace

std::string parse_stage_artifact(StageKind kind, const std::string& completion) {
    std::string text = trimmed(completion);
    switch (kind) {
        case StageKind::QuestionExplanation:
        case StageKind::MajorPremise:
        case StageKind::MinorPremiseQuestion: {
            // Drop an echoed cue ("Major premise: ...") if the model repeats it.
            std::string_view cue = output_label(kind);
            if (text.size() > cue.size()) {
                bool echoed = true;
                for (std::size_t i = 0; i < cue.size(); ++i) {
                    if (std::tolower(static_cast<unsigned char>(text[i])) !=
                        std::tolower(static_cast<unsigned char>(cue[i]))) {
                        echoed = false;
                        break;
                    }
                }
                if (echoed) text = trimmed(text.substr(cue.size()));
            }
            break;
        }
        case StageKind::MinorPremise: {
            std::size_t marker = find_last_ci(text, "minor premise:");
            if (marker != std::string::npos) {
                text = trimmed(text.substr(marker + std::string_view("minor premise:").size()));
            }
            break;
        }
        case StageKind::SyllogisticReasoning:
        case StageKind::DirectAnswer:
        case StageKind::ChainOfThought:
            break;
    }
    if (text.empty() && !completion.empty()) return completion;
    return text;
}

namespace {

StageRecord execute_stage(const StageBinding& binding, const TaskInstance& inst,
                          const SamplingParams& params, Provider& provider, const PromptEnv& env,
                          int sample_index, const std::map<StageKind, std::string>& artifacts) {
    StageRecord record;
    record.stage = binding.kind;

    const PromptTemplate& tmpl =
        env.templates->get(inst.answer_space, binding.kind, binding.template_name);
    const ExemplarSet& exemplars =
        env.exemplars->get(env.dataset_id, binding.kind, binding.template_name);
    FieldMap fields = visible_fields(binding.mask, inst, artifacts);
    record.rendered_prompt = render_stage_prompt(tmpl, binding.mask, fields,
                                                 render_exemplar_block(exemplars, binding.mask));

    CompletionRequest req;
    req.messages = {Message{"user", record.rendered_prompt}};
    req.params = params;
    req.sample_index = sample_index;
    req.meta = {{"instance_id", inst.id}, {"stage", std::string(to_string(binding.kind))}};

    auto start = std::chrono::steady_clock::now();
    CompletionResult result = provider.complete(req);
    record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    record.raw_completion = result.text;
    record.parsed_artifact = parse_stage_artifact(binding.kind, result.text);
    record.provider_meta = {{"finish_reason", std::string(to_string(result.finish_reason))},
                            {"cached", result.cached ? "true" : "false"}};
    return record;
}

void finish_transcript(Transcript& t, const TaskInstance& inst) {
    if (t.failure || t.stages.empty()) return;
    ExtractOutcome outcome =
        extract_answer(t.stages.back().raw_completion, inst.answer_space, option_labels(inst));
    if (auto* key = std::get_if<AnswerKey>(&outcome)) {
        t.extracted = *key;
    } else {
        t.extraction_failure = std::get<ExtractionFailure>(outcome).reason;
    }
}

}  // namespace

Transcript run_pipeline(const PipelineSpec& spec, const TaskInstance& inst,
                        const SamplingParams& params, Provider& provider, const PromptEnv& env,
                        int sample_index) {
    Transcript t;
    t.instance_id = inst.id;
    t.variant = spec.variant;
    t.sample_index = sample_index;

    std::map<StageKind, std::string> artifacts;
    for (const StageBinding& binding : spec.stages) {
        try {
            StageRecord record =
                execute_stage(binding, inst, params, provider, env, sample_index, artifacts);
            artifacts[binding.kind] = record.parsed_artifact;
            t.stages.push_back(std::move(record));
        } catch (const Error& e) {
            StageRecord failed;
            failed.stage = binding.kind;
            t.stages.push_back(std::move(failed));
            t.failure = StageFailure{binding.kind, e.what()};
            break;
        }
    }
    finish_transcript(t, inst);
    return t;
}

std::vector<Transcript> run_multi(const PipelineSpec& spec, const TaskInstance& inst,
                                  const SamplingParams& params, Provider& provider,
                                  const PromptEnv& env, bool freeze_shared_stages) {
    std::vector<Transcript> out;
    out.reserve(static_cast<std::size_t>(params.n_samples));
    for (int i = 0; i < params.n_samples; ++i) {
        if (freeze_shared_stages && i > 0 && spec.stages.size() > 1 && out[0].ok()) {
            // Reuse sample 0's premise stages; resample only the final stage.
            Transcript t;
            t.instance_id = inst.id;
            t.variant = spec.variant;
            t.sample_index = i;
            t.stages.assign(out[0].stages.begin(), out[0].stages.end() - 1);
            std::map<StageKind, std::string> artifacts;
            for (const auto& r : t.stages) artifacts[r.stage] = r.parsed_artifact;
            const StageBinding& last = spec.stages.back();
            try {
                t.stages.push_back(
                    execute_stage(last, inst, params, provider, env, i, artifacts));
                finish_transcript(t, inst);
            } catch (const Error& e) {
                StageRecord failed;
                failed.stage = last.kind;
                t.stages.push_back(std::move(failed));
                t.failure = StageFailure{last.kind, e.what()};
            }
            out.push_back(std::move(t));
            continue;
        }
        out.push_back(run_pipeline(spec, inst, params, provider, env, i));
    }
    return out;
}

}  // namespace srfot
