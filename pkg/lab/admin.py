from django.contrib import admin
from lab import models


admin.site.register(models.Run)
admin.site.register(models.SeriesRecord)
