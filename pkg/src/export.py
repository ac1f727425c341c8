"""
Report export for the Kisin module toolkit
Machine JSON to stdout or files, tabular summaries as CSV and text tables
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO, Union

import pandas as pd

from src.config import EXPORT_CONFIG

logger = logging.getLogger(__name__)


class ReportExporter:
    """Write report documents and tables"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        """
        Initialize report exporter

        Args:
            output_dir (str, optional): Directory for exported files
                (EXPORT_CONFIG['output_dir'] by default; created on first write)
        """
        self.output_dir = Path(output_dir or EXPORT_CONFIG['output_dir'])
        self.logger = logging.getLogger(__name__)

    def _generate_filename(self, base_name: str, extension: str) -> Path:
        """
        Generate filename with timestamp

        Args:
            base_name (str): Base name for the file
            extension (str): File extension

        Returns:
            Path: Full file path
        """
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        return self.output_dir / f"{base_name}_{timestamp}.{extension}"

    def _resolve(self, filename: Optional[Union[str, Path]], base_name: str, extension: str) -> Path:
        if filename is None:
            filepath = self._generate_filename(base_name, extension)
        else:
            filepath = Path(filename)
            if not filepath.is_absolute() and filepath.parent == Path('.'):
                filepath = self.output_dir / filepath
        filepath.parent.mkdir(parents=True, exist_ok=True)
        return filepath

    @staticmethod
    def dumps(document: Dict[str, Any]) -> str:
        return json.dumps(document, sort_keys=True, indent=2) + '\n'

    def emit_json(self, document: Dict[str, Any], out: Optional[Union[str, Path]] = None,
                  stream: Optional[TextIO] = None) -> Optional[str]:
        """
        Write a JSON document to a file, or to stdout when no path is given

        Args:
            document (dict): Report document
            out (str, optional): Output path
            stream (TextIO, optional): Stream used instead of stdout

        Returns:
            str: Path of the written file (None for stream output)
        """
        text = self.dumps(document)
        if out is None:
            (stream or sys.stdout).write(text)
            return None
        try:
            filepath = Path(out)
            filepath.parent.mkdir(parents=True, exist_ok=True)
            filepath.write_text(text, encoding='utf-8')
            self.logger.info(f"Wrote report to {filepath}")
            return str(filepath)
        except OSError as e:
            self.logger.error(f"Error writing report: {str(e)}")
            raise

    def export_to_csv(self, data: pd.DataFrame, filename: Optional[Union[str, Path]] = None,
                      include_index: bool = False) -> str:
        """
        Export a table to CSV format

        Args:
            data (pd.DataFrame): Data to export
            filename (str, optional): Custom filename
            include_index (bool): Include DataFrame index

        Returns:
            str: Path to exported file
        """
        try:
            filepath = self._resolve(filename, 'report', 'csv')
            data.to_csv(filepath, index=include_index, encoding='utf-8', lineterminator='\n')
            self.logger.info(f"Exported {len(data)} rows to CSV: {filepath}")
            return str(filepath)
        except OSError as e:
            self.logger.error(f"Error exporting to CSV: {str(e)}")
            raise

    def print_table(self, data: pd.DataFrame, title: Optional[str] = None,
                    stream: Optional[TextIO] = None) -> None:
        """Human-readable table on stderr"""
        stream = stream or sys.stderr
        if title:
            stream.write(f"{title}\n")
        if data.empty:
            stream.write("(none)\n")
        else:
            stream.write(data.to_string(index=False) + "\n")


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def diagnostics_frame(diagnostics: Iterable) -> pd.DataFrame:
    rows = [{'code': d.code,
             'position': '' if d.position is None else f"({d.position[0]},{d.position[1]})",
             'message': d.message} for d in diagnostics]
    return pd.DataFrame(rows, columns=['code', 'position', 'message'])


def certificate_frame(certificate) -> pd.DataFrame:
    """One row per filtration step: slot sigma(i), its input character and the lift"""
    rows = []
    for i, chi in enumerate(certificate.output_chars):
        slot = certificate.sigma(i + 1)
        source = certificate.input_chars[slot - 1]
        rows.append({
            'step': i + 1,
            'slot': slot,
            'mu': str(source.mu),
            's': source.s,
            'a_hat': list(chi.a_hat.coeffs),
            'weight': chi.t,
        })
    return pd.DataFrame(rows, columns=['step', 'slot', 'mu', 's', 'a_hat', 'weight'])


def tally_frame(tallies: Dict[str, Dict[str, int]]) -> pd.DataFrame:
    """Pass/fail counts per invariant, sorted by invariant name"""
    rows: List[Dict[str, Any]] = [
        {'invariant': name, 'passed': counts.get('passed', 0), 'failed': counts.get('failed', 0)}
        for name, counts in sorted(tallies.items())
    ]
    return pd.DataFrame(rows, columns=['invariant', 'passed', 'failed'])
