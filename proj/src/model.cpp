#include "knowprobe/model.hpp"

#include <sstream>

#include "knowprobe/toy_lm.hpp"

namespace knowprobe {

BackendRegistry& BackendRegistry::instance() {
    static BackendRegistry registry;
    return registry;
}

void BackendRegistry::register_backend(const std::string& name, BackendFactory factory) {
    factories_[name] = std::move(factory);
}

std::unique_ptr<ModelAdapter> BackendRegistry::create(const ModelConfig& config) const {
    auto it = factories_.find(config.backend);
    if (it == factories_.end()) {
        std::ostringstream msg;
        msg << "unknown model backend '" << config.backend << "'; available:";
        for (const auto& [name, _] : factories_) msg << " " << name;
        throw Error(ErrorCode::CapabilityUnsupported, msg.str());
    }
    return it->second(config);
}

std::vector<std::string> BackendRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(factories_.size());
    for (const auto& [name, _] : factories_) out.push_back(name);
    return out;
}

std::unique_ptr<ModelAdapter> make_adapter(const ModelConfig& config) {
    register_toy_backend();
    return BackendRegistry::instance().create(config);
}

TokenizedPair make_tokenized_pair(const ModelAdapter& adapter,
                                  const std::string& prompt,
                                  const std::string& text) {
    TokenizedPair pair;
    pair.prompt_text = prompt;
    pair.gen_text = text;
    pair.prompt_tokens = adapter.tokenize(prompt);
    pair.gen_tokens = adapter.tokenize(text);
    return pair;
}

} // namespace knowprobe
