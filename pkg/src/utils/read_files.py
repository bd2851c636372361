import json
import logging
import os
import tempfile

import yaml

logger = logging.getLogger(__name__)


class File(object):
    """Text document on disk (scenario json, config yaml, csv and text reports).

    Args:
        filepath (str): path of the document. Its extension decides how `read` parses it.
    """
    SUPPORTED_EXTENSIONS = ('.json', '.yaml', '.yml', '.csv', '.txt')

    def __init__(self, filepath: str) -> None:
        extension = os.path.splitext(filepath)[-1].lower()
        if extension not in self.SUPPORTED_EXTENSIONS:
            raise ValueError(f"filepath must be one of {', '.join(self.SUPPORTED_EXTENSIONS)} "
                             f"files: {filepath}")
        self.filepath = filepath
        self.extension = extension

    def read_text(self) -> str:
        with open(self.filepath, 'r', encoding='utf-8') as f:
            return f.read()

    def read(self):
        """Parse the document according to its extension.

        Returns:
            dict or str: parsed json / yaml mapping, raw text otherwise.
        """
        if self.extension == '.json':
            with open(self.filepath, 'r', encoding='utf-8') as f:
                return json.load(f)
        if self.extension in ('.yaml', '.yml'):
            with open(self.filepath, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        return self.read_text()

    def write_text(self, text: str) -> str:
        """Write `text` atomically: a temporary file in the same directory is renamed over the
        destination, so readers never observe a partially written file.

        Returns:
            str: the destination path.
        """
        directory = os.path.dirname(os.path.abspath(self.filepath))
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', suffix=self.extension, dir=directory)
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, self.filepath)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        logger.debug('wrote %s', self.filepath)
        return self.filepath

    def write_frame(self, frame) -> str:
        """Write a pandas DataFrame as csv (no index); floats keep their shortest round-trip repr."""
        return self.write_text(frame.to_csv(index=False, lineterminator='\n'))
