from .messages import RawMessage, parse_timestamp, format_timestamp, read_messages_csv, write_messages_csv
from .pipeline import (
    DEFAULT_STAGES,
    CleanMessage,
    PipelineConfig,
    preprocess,
    preprocess_many,
    segment_hashtag,
    write_cleaned_corpus,
)
