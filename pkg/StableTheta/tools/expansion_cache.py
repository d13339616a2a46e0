"""
StableTheta Expansion Cache
Persists complete expansions as checksummed plain-text files
"""

import hashlib
import logging
import os
import tempfile
from typing import Optional

from ..config.settings import CACHE_FORMAT_VERSION
from ..exceptions import CacheFormatError
from ..forms.fourier import Expansion, enumerate_indices, format_expansion, parse_expansion

logger = logging.getLogger(__name__)


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the same directory and rename it into place"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".partial-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


class ExpansionCache:
    """Caches computed expansions for reuse across runs"""

    def __init__(self, cache_dir: str = ".stabletheta_cache"):
        self.cache_dir = cache_dir

    def get_cache_key(self, kind: str, label: str, genus: int, trace_bound: int) -> str:
        """Generate cache key from the request"""
        content = f"v{CACHE_FORMAT_VERSION}:{kind}:{label}:{genus}:{trace_bound}".lower()
        return hashlib.sha256(content.encode()).hexdigest()[:24]

    def path_for(self, kind: str, label: str, genus: int, trace_bound: int) -> str:
        key = self.get_cache_key(kind, label, genus, trace_bound)
        return os.path.join(self.cache_dir, f"{kind}-{label}-g{genus}-b{trace_bound}-{key}.txt")

    def load(self, kind: str, label: str, genus: int, trace_bound: int) -> Optional[Expansion]:
        """
        Read a cached expansion, verifying its checksum and header

        Args:
            kind: "theta" or "igusa"
            label: Form label
            genus: Genus
            trace_bound: Trace bound

        Returns:
            The expansion, or None when no file exists
        """
        path = self.path_for(kind, label, genus, trace_bound)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                expansion = parse_expansion(f.read())
        except OSError as e:
            raise CacheFormatError(f"cannot read {path}: {e}") from None
        except CacheFormatError as e:
            raise CacheFormatError(f"{path}: {e}") from None
        if (expansion.genus, expansion.trace_bound) != (genus, trace_bound):
            raise CacheFormatError(f"{path}: header does not match the request")
        if expansion.complete:
            missing = set(enumerate_indices(genus, trace_bound)) - set(expansion.coeffs)
            if missing:
                raise CacheFormatError(f"{path}: complete table lacks {len(missing)} indices")
        logger.debug("cache hit %s", path)
        return expansion

    def store(self, expansion: Expansion, kind: str) -> str:
        """
        Write a complete expansion; restricted expansions are never cached

        Returns:
            Path of the written file
        """
        if not expansion.complete:
            raise CacheFormatError("restricted expansions are not cached")
        path = self.path_for(kind, expansion.label, expansion.genus, expansion.trace_bound)
        write_atomic(path, format_expansion(expansion))
        logger.debug("cached %s", path)
        return path
