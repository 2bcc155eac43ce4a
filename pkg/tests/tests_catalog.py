import json

import pytest

from app import main
from Models.runModel import RunRecord
from Models.tablesSchema import RunKind, RunStatus
from Persistence.DBStorage import DBStorage
from Services.simulationService import SimulationService


@pytest.fixture
def catalog(tmp_path):
    storage = DBStorage(f"sqlite:///{tmp_path / 'runs.db'}")
    storage.reload()
    yield storage
    storage.close()


def test_record_lifecycle(catalog):
    record = RunRecord(kind=RunKind.DBO, status=RunStatus.RUNNING, out_dir='/tmp/run',
                       n_points=32, n_species=6, rank=2, t_final=1.0)
    catalog.new(record)
    catalog.save()

    loaded = catalog.get(RunRecord, record.id)
    assert loaded.status == RunStatus.RUNNING
    loaded.complete(1.0, 0.01)
    catalog.save()

    data = catalog.get(RunRecord, record.id).to_dict()
    assert data['status'] == 'completed'
    assert data['final_error'] == 0.01
    assert catalog.get(RunRecord, 'absent') is None


def test_failure_message(catalog):
    record = RunRecord(kind=RunKind.FOM, status=RunStatus.RUNNING, out_dir='/tmp/fom',
                       n_points=32, n_species=6, t_final=1.0)
    catalog.new(record)
    record.fail("non-finite block 'phi'")
    catalog.save()
    (found,) = catalog.filter_by(RunRecord, status=RunStatus.FAILED)
    assert found.message == "non-finite block 'phi'"


def test_transaction_rolls_back(catalog):
    with pytest.raises(RuntimeError):
        with catalog.transaction():
            catalog.new(RunRecord(kind=RunKind.DBO, out_dir='/tmp/x', n_points=8, n_species=2,
                                  t_final=0.0))
            raise RuntimeError("abort")
    assert catalog.filter_by(RunRecord) == []


def test_simulation_is_recorded(catalog, small_config, tmp_path):
    cfg = small_config.with_section('time', t_final=0.0)
    SimulationService.run_dbo(cfg, out_dir=tmp_path / 'dbo', catalog=catalog)
    (record,) = catalog.filter_by(RunRecord, kind=RunKind.DBO)
    assert record.status == RunStatus.COMPLETED
    assert record.rank == 2
    assert record.t_reached == 0.0


def test_failed_simulation_is_recorded(catalog, small_config, tmp_path):
    with pytest.raises(Exception):
        SimulationService.run_dbo(small_config, out_dir=tmp_path / 'none', resume=True, catalog=catalog)
    (record,) = catalog.filter_by(RunRecord, status=RunStatus.FAILED)
    assert 'cannot resume' in record.message


def test_list_runs(catalog, monkeypatch, capsys):
    catalog.new(RunRecord(kind=RunKind.FOM, status=RunStatus.COMPLETED, out_dir='/tmp/fom',
                          n_points=32, n_species=6, t_final=1.0, t_reached=1.0))
    catalog.save()
    monkeypatch.setattr('Cli.common.storage', catalog)
    assert main(['list-runs', '--kind', 'fom']) == 0
    out = capsys.readouterr().out
    assert '/tmp/fom' in out
    assert 'completed' in out


def test_list_runs_as_json(catalog, monkeypatch, capsys):
    record = RunRecord(kind=RunKind.DBO, status=RunStatus.COMPLETED, out_dir='/tmp/dbo',
                       n_points=32, n_species=6, rank=2, t_final=1.0, t_reached=1.0, final_error=0.02)
    catalog.new(record)
    catalog.save()
    monkeypatch.setattr('Cli.common.storage', catalog)
    assert main(['list-runs', '--id', record.id, '--json']) == 0
    (line,) = capsys.readouterr().out.splitlines()
    data = json.loads(line)
    assert data['id'] == record.id
    assert data['kind'] == 'dbo'
    assert data['status'] == 'completed'
    assert data['final_error'] == 0.02


def test_list_runs_unknown_id(catalog, monkeypatch):
    monkeypatch.setattr('Cli.common.storage', catalog)
    assert main(['list-runs', '--id', 'absent']) == 2
