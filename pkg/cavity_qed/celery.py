from celery import Celery

app = Celery("cavity_qed")
app.config_from_object("cavity_qed.settings", namespace="CELERY")
app.autodiscover_tasks(["cli"])
