"""lrlkit: measure how well an LLM supports a low-resource language, build
alignment-augmented prompts, evaluate them against any compatible inference
endpoint, and recommend an adaptation strategy."""

__version__ = "0.1.0"
