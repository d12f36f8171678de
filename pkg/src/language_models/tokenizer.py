"""Byte Tokenizer - SpecDec Lab"""

from typing import List, Sequence

from src.errors import VocabularyError

EOS_TOKEN = 256
BYTE_VOCAB_SIZE = 257


class ByteTokenizer:
    """UTF-8 bytes as token ids 0-255, with a reserved end-of-sequence id 256."""

    eos_token = EOS_TOKEN
    vocab_size = BYTE_VOCAB_SIZE

    def encode(self, text: str, add_eos: bool = True) -> List[int]:
        ids = list(text.encode("utf-8"))
        if add_eos:
            ids.append(EOS_TOKEN)
        return ids

    def decode(self, ids: Sequence[int]) -> str:
        data = bytearray()
        for token in ids:
            if token == EOS_TOKEN:
                break
            if not 0 <= token < 256:
                raise VocabularyError(f"Token id {token} is not a byte")
            data.append(token)
        return data.decode("utf-8", errors="replace")
