"""Pretty printing for verdict reports, metrics and fuzz campaigns
"""
from io import StringIO
from contextlib import closing

from texttable import Texttable as TextTable

from .checker import PROPERTIES


def verdicts_to_ascii_table(report):
    """Formats {property id: Verdict} as an ascii table, one row
    per property with the first violation or the skip reason
    """
    with closing(StringIO()) as out:
        t = TextTable(max_width=120)
        t.set_deco(TextTable.HEADER)
        t.set_cols_dtype(['t'] * 4)
        t.set_cols_align(["l"] * 4)
        t.set_cols_width([10, 44, 13, 45])
        rows = [['Property', 'Name', 'Status', 'Detail']]
        for prop, verdict in report.items():
            if verdict.violations:
                detail = verdict.violations[0].message
                if len(verdict.violations) > 1:
                    detail += " (+{} more)".format(
                        len(verdict.violations) - 1)
            else:
                detail = verdict.reason or ''
            rows.append([prop, PROPERTIES.get(prop, prop),
                         verdict.status, detail])
        t.add_rows(rows)
        out.write(t.draw() + "\n")
        return out.getvalue()


def metrics_to_ascii_table(metrics):
    with closing(StringIO()) as out:
        t = TextTable()
        t.set_deco(TextTable.HEADER)
        t.set_cols_dtype(['t'] * 2)
        t.set_cols_align(["l", "r"])
        rows = [['Metric', 'Value']]
        for name, value in metrics.items():
            if isinstance(value, dict):
                for key, v in value.items():
                    rows.append(["{} [{}]".format(name, key), _text(v)])
            else:
                rows.append([name, _text(value)])
        t.add_rows(rows)
        out.write(t.draw() + "\n")
        return out.getvalue()


def campaign_to_ascii_table(campaign):
    """Per seed failures of a fuzz campaign, clean seeds are counted
    in the last row
    """
    with closing(StringIO()) as out:
        t = TextTable(max_width=120)
        t.set_deco(TextTable.HEADER)
        t.set_cols_dtype(['t'] * 3)
        t.set_cols_align(["r", "l", "l"])
        rows = [['Seed', 'Failed', 'Quiescent']]
        for run in campaign.runs:
            if run.failed:
                rows.append([str(run.seed), ", ".join(run.failed),
                             "yes" if run.quiescent else "no"])
        rows.append(["-", "{} of {} runs clean, {} cross-checked".format(
            campaign.clean, len(campaign.runs), campaign.cross_checked), "-"])
        t.add_rows(rows)
        out.write(t.draw() + "\n")
        return out.getvalue()


def _text(value):
    if value is None:
        return "n/a"
    return str(value)
