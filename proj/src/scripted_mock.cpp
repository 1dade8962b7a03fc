#include "flag/scripted_mock.hpp"

#include "flag/error.hpp"

namespace flag {

namespace {

BackendDescriptor default_mock_descriptor() {
    BackendDescriptor d;
    d.kind = BackendDescriptor::Kind::scripted_mock;
    d.model_name = "scripted-mock";
    return d;
}

}  // namespace

ScriptedMock::ScriptedMock() : descriptor_(default_mock_descriptor()) {}

ScriptedMock::ScriptedMock(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    descriptor_.kind = BackendDescriptor::Kind::scripted_mock;
}

void ScriptedMock::bind(const std::string& key, std::shared_ptr<Sequence> sequence, bool overwrite) {
    std::lock_guard lock(mutex_);
    if (overwrite) {
        scripts_[key] = std::move(sequence);
    } else {
        scripts_.try_emplace(key, std::move(sequence));
    }
}

void ScriptedMock::on_prompt(const std::string& key, std::vector<ScriptedResponse> sequence) {
    if (sequence.empty()) {
        throw ConfigError("scripted sequence must not be empty");
    }
    auto seq = std::make_shared<Sequence>();
    seq->responses = std::move(sequence);
    bind(key, std::move(seq), true);
}

void ScriptedMock::script_line(const PreprocessedFile& file, std::size_t loc, Mode mode,
                               const GenerationParams& params, std::vector<ScriptedResponse> sequence) {
    if (sequence.empty()) {
        throw ConfigError("scripted sequence must not be empty");
    }
    auto seq = std::make_shared<Sequence>();
    seq->responses = std::move(sequence);
    const Prompt plain = build_prompt(file, loc, mode, params);
    const Prompt assisted = apply_assist(plain, file.lines[loc], params);
    bind(cache_key(plain, params, descriptor_), seq, true);
    bind(cache_key(assisted, params, descriptor_), seq, true);
}

void ScriptedMock::echo_original(const PreprocessedFile& file, Mode mode, const GenerationParams& params) {
    for (std::size_t loc = file.start_index; loc < file.lines.size(); ++loc) {
        const Prompt plain = build_prompt(file, loc, mode, params);
        const Prompt assisted = apply_assist(plain, file.lines[loc], params);
        const std::string& raw = file.lines[loc].raw;

        auto whole = std::make_shared<Sequence>();
        whole->responses = {ScriptedResponse{raw, std::nullopt}};
        bind(cache_key(plain, params, descriptor_), whole, false);

        auto rest = std::make_shared<Sequence>();
        rest->responses = {ScriptedResponse{raw.substr(assisted.assist.size()), std::nullopt}};
        bind(cache_key(assisted, params, descriptor_), rest, false);
    }
}

std::vector<ScriptedResponse> ScriptedMock::empty_then(int empties, ScriptedResponse response) {
    std::vector<ScriptedResponse> out(static_cast<std::size_t>(std::max(empties, 0)));
    out.push_back(std::move(response));
    return out;
}

Completion ScriptedMock::complete(const Prompt& prompt, const GenerationParams& params) {
    ++calls_;
    const auto key = cache_key(prompt, params, descriptor_);
    std::shared_ptr<Sequence> seq;
    {
        std::lock_guard lock(mutex_);
        if (auto it = scripts_.find(key); it != scripts_.end()) {
            seq = it->second;
        }
    }
    if (!seq) {
        throw BackendError(BackendError::Kind::cache_miss, "scripted mock has no response for prompt " + key);
    }
    std::lock_guard lock(seq->mutex);
    const auto& r = seq->responses[std::min(seq->next, seq->responses.size() - 1)];
    ++seq->next;
    return Completion{r.text, r.token_logprobs, std::nullopt, false};
}

}  // namespace flag
