import django.http
from django.http import JsonResponse

from diagnostics.records import COLUMNS
from lab import models


def run_list(request):
    return JsonResponse({
        'runs': [run.serialize() for run in models.Run.objects.order_by('-pk')]
    })


def run_view(request, pk):
    try:
        run = models.Run.objects.get(pk=pk)
    except models.Run.DoesNotExist:
        return django.http.HttpResponseNotFound('Invalid run ID')

    return django.http.HttpResponse(run.markdown_report())


def run_series(request, pk):
    try:
        run = models.Run.objects.get(pk=pk)
    except models.Run.DoesNotExist:
        return django.http.HttpResponseNotFound('Invalid run ID')

    return JsonResponse({
        'run': run.pk,
        'columns': list(COLUMNS),
        'records': [record.serialize() for record in run.series.all()]
    })
